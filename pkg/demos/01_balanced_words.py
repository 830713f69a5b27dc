"""Balanced binary words: the algebra behind the steady schedules.

A transition's steady activity is a word over {0, 1}; the scheduler only
ever emits *balanced* words, whose equal-length factors carry nearly the
same work.  This script walks through rotation, transposition and the
alpha coefficient that ties the two together.

Run:  python3 demos/01_balanced_words.py
"""

from mgsched import (
    alpha,
    balanced_transpose,
    balanced_words,
    canonical_delta,
    is_balanced,
    mechanical_word,
    orbit,
    rotate,
    word,
)

k, p = 4, 7
print(f"parameters: {k} firings every {p} instants\n")

u = mechanical_word(k, p)
print(f"mechanical word        {u}   (balanced: {is_balanced(u)}, ones: {u.ones})")
print(f"unbalanced comparison  1111000 (balanced: {is_balanced(word('1111000'))})")

print("\nthe rotation orbit is the whole family of balanced words:")
for v in balanced_words(k, p):
    print(f"  {v}")

print("\nrotating moves the last letter to the front:")
print(f"  rotate({u}, 1) = {rotate(u, 1)}")
print(f"  rotate({u}, 3) = {rotate(u, 3)}")
print(f"  rotate({u}, {p}) = {rotate(u, p)}   (full circle)")

w = word("1101010")
delta = canonical_delta(w)
t = balanced_transpose(w, 1)
print(f"\ntransposition swaps the unique balance-preserving '10' into '01':")
print(f"  word {w}, location {delta}  ->  {t}")

a = alpha(k, p).alpha
print(f"\nalpha({k}, {p}) = {a}   since -{k}*{a} = 1 (mod {p})")
print("one transposition is one backward alpha-rotation:")
print(f"  rotate({w}, -{a}) = {rotate(w, -a)}  ==  transpose -> {t}")
print(f"  so n delays on a place rotate its consumer's word by 1 - n*{a}")

print("\ntranspose is a bijection of the orbit; p applications close the loop:")
cursor = w
for i in range(1, p + 1):
    cursor = balanced_transpose(cursor, 1)
    print(f"  tau^{i}({w}) = {cursor}")

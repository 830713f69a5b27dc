"""Scheduling an open dataflow pipeline.

An encryption-round pipeline reads two inputs (key, word) and writes one
output; the round loop holds the state token.  Open graphs cannot be
scheduled directly (a bounded rate needs feedback), so the pipeline adds
return paths from the sink to each source, sized so the new cycles never
slow the round loop down.  Sources then fire exactly when the schedule
says a fresh input token must be available.

Run:  python3 demos/03_open_pipeline.py
"""

from mgsched import close_graph, elementary_cycles, load_graph, schedule, validate

g = load_graph("demos/graphs/open_pipeline.json")
report = validate(g)
print(f"input: {report.connectivity}, sources {report.sources}, sinks {report.sinks}\n")

closed, provenance = close_graph(g)
feedback = [p for p in closed.place_ids if provenance.is_synthetic(p)]
print(f"closure adds {len(feedback)} feedback place(s):")
for pid in feedback:
    place = closed.place_by_id[pid]
    print(f"  {place.producer} -> {place.consumer}  ({place.tokens} tokens)")
for c in elementary_cycles(closed):
    print(f"  cycle: {c.tokens}/{len(c)} = {c.ratio}")

result = schedule(g)
print(f"\nscheduled: every transition fires {result.k} time(s) per {result.p} instants")
print(f"all place sizes: {sorted(set(result.sizes.values()))}")
print("\nsource and sink schedules (when to feed and when to collect):")
for t in ("key", "word", "output_word"):
    print(f"  {t:<12} {result.schedules[t]}")

print("\nthe pre-closed variant (demos/graphs/closed_pipeline.json) spaces its")
print("feedback over relay stations and starts one step off the steady orbit:")
pre = schedule(load_graph("demos/graphs/closed_pipeline.json"))
print(f"  periodicity {pre.k}, period {pre.p}, initialization length {pre.initial_length}")

"""
A tour of the fixture corpus
============================

Every fixture is hand-assembled bytecode with a known signature. This
recovers each one, checks it against the ground truth and tallies which
inference rules fired.
"""

import collections

from sigscope.fixtures import corpus
from sigscope.rules import recover_timed

fixtures = corpus()
print(f"{len(fixtures)} fixtures\n")

fired = collections.Counter()
hits = 0
for fx in fixtures:
    (sig, dt), = recover_timed(fx.bytecode)
    ok = str(sig) == str(fx.ground_truth)
    hits += ok
    applied = sorted({r for per in sig.rules for r in per}, key=lambda r: int(r[1:]))
    fired.update(applied)
    notes = ",".join(sorted({n["kind"] for n in sig.notes}))
    print(f"{'ok ' if ok else 'BAD'} {fx.name:28s} {sig.types_text:40s} {dt * 1000:6.2f} ms  {notes}")

print(f"\n{hits}/{len(fixtures)} exact")
print("rule counts:", ", ".join(f"{r}={fired[r]}" for r in sorted(fired, key=lambda r: int(r[1:]))))

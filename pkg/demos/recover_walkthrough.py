"""
Recovering a signature step by step
===================================

Walks the worked example (a public function taking ``uint8[]`` and
``address``) through every stage of the pipeline.
"""

from sigscope.dispatcher import detect_dialect, extract_functions
from sigscope.evm import decode, disassemble, partition_blocks
from sigscope.fixtures import worked_example
from sigscope.rules import coarse_infer, count_and_order, fine_infer, recover
from sigscope.tase import BlockMap, execute_function, mark_argument_symbols

code = worked_example().bytecode
print(f"{len(code)} bytes of runtime code")

# split into basic blocks and show the first few
blocks = partition_blocks(decode(code))
print(f"{len(blocks)} basic blocks")
print(disassemble(code).split("\n\n")[0])

# find the dispatcher entries
bmap = BlockMap(blocks)
dialect = detect_dialect(bmap)
(entry,) = extract_functions(bmap, dialect)
print(f"\n{dialect} dispatcher: selector 0x{entry.selector:08x} enters at {entry.entry_block:#x}")

# run the function body symbolically and look at what it did with calldata
facts = execute_function(bmap, entry)
print(f"\n{len(facts.facts)} facts from {facts.blocks_visited} blocks")
for f in facts.loads:
    print("  CALLDATALOAD", f.loc)
for c in facts.copies:
    print("  CALLDATACOPY", c.cd_offset, "len", c.length)

# structure first, then item types
sketches = count_and_order(coarse_infer(facts, dialect))
for s in sketches:
    print(f"\nparameter at {s.location}: {s.kind} {s.dims or ''} via {s.rules}")
types, notes, rules = fine_infer(mark_argument_symbols(facts, sketches), sketches, dialect)
print("\nrefined types:", ", ".join(map(str, types)))
print("rules per parameter:", rules)

# the one-call version
print("\nrecover():", recover(code)[0])

"""The mapping DSL: distributions as one-line functions over reshaped spaces.

A mapper file reshapes the machine's processor space with transformation
primitives, then maps each iteration point with plain tuple arithmetic.  The
same mapping function body produces block, cyclic, or block-cyclic behavior
purely through the shape of the space it indexes.
"""

from procmap.dsl import eval_mapping, parse, validate
from procmap.spaces import MachineShape

SOURCE = """\
m = Machine(GPU)
m1 = m.merge(0, 1).split(0, 1)
m2 = m.merge(0, 1).split(0, 4)

def block2D(Tuple ipoint, Tuple ispace):
    idx = ipoint * m.size / ispace
    return m[*idx]

def block1D_y(Tuple ipoint, Tuple ispace):
    idx = ipoint * m2.size / ispace
    return m2[*idx]

def cyclic2D(Tuple ipoint, Tuple ispace):
    idx = ipoint % m.size
    return m[*idx]

def blockcyclic(Tuple ipoint, Tuple ispace):
    idx = ipoint / m.size % m.size
    return m[*idx]

IndexTaskMap stencil block2D
"""

print(__doc__)

machine = MachineShape("GPU", 2, 2)
program = parse(SOURCE)
diags = validate(program)
assert not [d for d in diags if d.severity == "error"]
print(f"parsed {len(program.statements)} statements, "
      f"{len(program.functions)} functions; diagnostics: {len(diags)}")


def show(func: str, ispace: tuple[int, int]) -> None:
    print(f"\n{func} over {ispace} on 2 nodes x 2 GPUs "
          "(cell = node.gpu for each iteration point):")
    for i in range(ispace[0]):
        row = []
        for j in range(ispace[1]):
            node, gpu = eval_mapping(program, func, (i, j), ispace, machine)
            row.append(f"{node}.{gpu}")
        print("   " + " ".join(row))


show("block2D", (4, 4))
show("block1D_y", (4, 4))
show("cyclic2D", (4, 4))
show("blockcyclic", (8, 8))

point = (2, 3)
node, gpu = eval_mapping(program, "block2D", point, (6, 6), machine)
print(f"\nblock2D maps iteration point {point} of a (6, 6) space "
      f"to node {node}, GPU {gpu}")

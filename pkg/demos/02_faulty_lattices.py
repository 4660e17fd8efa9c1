"""Sampling faulty cluster lattices under the fusion bond model.

Qubits live at integer positions with exactly one or two odd coordinates
(cell edges and cell faces); bonds join unit-distance pairs, so every
interior qubit has degree four.  Each fusion, i.e. each ideal bond, fails
independently with probability p_fail; the skip-bond variant occasionally
replaces a failed bond with a distance-2 collinear edge.
"""

from raussim import (
    GenModel,
    ModelKind,
    build_perfect_lattice,
    generate_faulty,
    spanning_check,
    translate_faults_to_loss,
)
from raussim.io import dump_lattice

# the unit cell: 18 qubits, 24 bonds
cell = build_perfect_lattice((3, 3, 3))
odd = (cell.node_pos % 2).sum(axis=1)
print(f"unit cell: {cell.num_nodes} qubits "
      f"({(odd == 1).sum()} edge-type + {(odd == 2).sum()} face-type), "
      f"{cell.edge_count()} bonds")

# one faulty sample at the headline failure rate
model = GenModel(p_fail=0.25, seed=42)
inst = generate_faulty((40, 40, 40), model)
print(f"\n40^3 sample at p_fail=0.25, seed=42:")
print(f"  qubits          {inst.num_nodes}")
print(f"  bonds realized  {inst.realized_bonds} "
      f"({inst.realized_bonds / inst.ideal_bonds:.3f} of ideal)")
print(f"  bonds failed    {inst.failed_bonds}")
print(f"  loss translation would erase {len(translate_faults_to_loss(inst))} qubits")

# skip-bond variant: failed fusions sometimes leave non-local edges behind
skip = generate_faulty((40, 40, 40),
                       GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.25, q_skip=0.1, seed=42))
print(f"  skip-bond variant adds {skip.nonlocal_bonds} distance-2 edges")

# spanning survives 25% failures comfortably; it dies once fewer than
# about 37.3% of the bonds are left alive
print("\nspanning along x vs failure rate (one seed each):")
for p in (0.25, 0.45, 0.60, 0.65, 0.70):
    s = spanning_check(generate_faulty((40, 40, 40), GenModel(p_fail=p, seed=7)), 0)
    print(f"  p_fail={p:.2f}  surviving={1 - p:.2f}  spanning={s}")

# instances serialize to a line-oriented dump that round-trips bit-exactly
text = dump_lattice(generate_faulty((6, 6, 6), GenModel(p_fail=0.25, seed=1), box_size=6))
print(f"\ndump preview ({len(text.splitlines())} lines):")
for line in text.splitlines()[:6]:
    print("  " + line)
print("  ...")

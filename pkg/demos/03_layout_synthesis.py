# Keyboard synthesis: digraph flows + predicted movement times -> QAP.
#
# The 27x27 digraph probability matrix is zero-padded onto the 81-position
# grid, so the solver also chooses WHERE on the grid the keyboard lives;
# that is how differently shaped keyboards emerge for different users.

from keyfitts import (
    anisotropic_model,
    build_grid,
    fitts_digraph_energy,
    flip_vertical,
    generate_layout,
    generic_model,
    ingest_phrases,
    qwerty_layout,
)
from keyfitts.corpus import bundled_phrases


def render(layout):
    rows = {}
    for ch, pos in layout.assignment.items():
        rows.setdefault(pos.row, {})[pos.col] = "_" if ch == " " else ch
    lines = []
    for r in range(layout.grid.rows):
        if r not in rows:
            continue
        offset = " " if r % 2 else ""
        cells = [rows[r].get(c, ".") for c in range(layout.grid.cols)]
        lines.append(offset + " ".join(cells))
    return "\n".join(lines)


digraphs = ingest_phrases(bundled_phrases("eval500"))
grid = build_grid(9, 9, 130)
generic = generic_model(130)
aniso = anisotropic_model(130, a=0.83, b_vertical=0.5, horizontal_ratio=2.0)

qwerty = qwerty_layout()
optimized = generate_layout("generic", None, digraphs, grid, seed=1)
personalized = generate_layout("personalized", aniso, digraphs, grid, seed=1)

print("QWERTY (space shown as _):")
print(render(qwerty))
print("\ngenerically optimized (isotropic constants):")
print(render(optimized))
print("\npersonalized for a horizontally-slow user (note the tall shape):")
print(render(personalized))

print("\nFitts-digraph energy, seconds per keystroke:")
print(f"{'layout':<14} {'generic model':>14} {'anisotropic user':>17}")
for name, lay in (("qwerty", qwerty), ("optimized", optimized), ("personalized", personalized)):
    e_gen = fitts_digraph_energy(lay, digraphs, generic)
    e_user = fitts_digraph_energy(lay, digraphs, aniso)
    print(f"{name:<14} {e_gen:>14.4f} {e_user:>17.4f}")

flipped = flip_vertical(optimized)
print("\nflipping the optimized layout leaves generic-model energy unchanged:")
print(f"  {fitts_digraph_energy(optimized, digraphs, generic):.9f}")
print(f"  {fitts_digraph_energy(flipped, digraphs, generic):.9f}")

# Direction-binned Fitts' law models: difficulty, prediction, anisotropy.
#
# Movement time follows MT = a + b * log2(D/W + 1).  Instead of one (a, b)
# pair we keep one per 22.5-degree movement direction, which is what lets a
# keyboard optimizer exploit directions a user moves well in.

import numpy as np

from keyfitts import (
    anisotropic_model,
    build_grid,
    generic_model,
    index_of_difficulty,
    predict_mt,
)

grid = build_grid(9, 9, 130)

# The standard constants: 0.127 s reaction delay, 1/4.9 s per bit.
generic = generic_model(130)
print("index of difficulty for one, three, seven key widths:")
for hops in (1, 3, 7):
    ident = index_of_difficulty(130 * hops, 130)
    print(f"  {hops} hops -> {ident:.3f} bits -> {predict_mt(generic, 0.0, 130 * hops):.3f} s")

# The generic model is isotropic: direction does not matter.
print("\ngeneric model, 260 px move at various angles:")
for angle in (0, 45, 90, 200):
    print(f"  {angle:3d} deg -> {predict_mt(generic, angle, 260):.4f} s")

# A user who moves vertically twice as fast as horizontally.
aniso = anisotropic_model(130, a=0.83, b_vertical=0.5, horizontal_ratio=2.0)
print("\nanisotropic user, 260 px move:")
for angle in (0, 45, 90):
    print(f"  {angle:3d} deg -> {predict_mt(aniso, angle, 260):.4f} s")

# Per-bin slopes: horizontal bins cost double the vertical ones.
slopes = np.array([b.b for b in aniso.bins])
print("\nslope by bin (bin 0 = rightward, bin 4 = up):")
print(np.array2string(slopes, precision=3))

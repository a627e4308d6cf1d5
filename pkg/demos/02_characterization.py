# The movement characterization protocol, driven by a simulated user.
#
# 225 seeded targets (25 per hop-distance class, spread over 16 angular
# bins), unlimited retries per target, then refinement rounds for weak bins
# until everything fits well or 400 targets have been presented.

from keyfitts import CharacterizationSession, build_grid, simulate_characterization
from keyfitts.charact import export_log, import_log
from keyfitts.fitts import anisotropic_model

grid = build_grid(9, 9, 130)
truth = anisotropic_model(130, a=0.6, b_vertical=0.45, horizontal_ratio=1.8)

session = CharacterizationSession(grid, seed=7)
simulate_characterization(session, truth, mt_noise=0.08, miss_rate=0.05, noise_kind="normal", seed=7)

print(f"presented targets : {session.presented_count}")
print(f"events logged     : {len(session.events)}")
print(f"movement samples  : {len(session.samples)}")
print(f"demands dropped   : {len(session.dropped)}")
print(f"phase             : {session.phase.value}")

model = session.fit_model()
print("\nper-bin fit (truth slope varies with |cos(angle)|):")
print(f"{'bin':>3} {'truth_b':>8} {'a':>7} {'b':>7} {'R2':>6} {'n':>4} {'outliers':>8}")
for k, b in enumerate(model.bins):
    print(
        f"{k:>3} {truth.bins[k].b:8.3f} {b.a:7.3f} {b.b:7.3f} {b.r_squared:6.3f} "
        f"{b.n_samples:>4} {b.outlier_count:>8}"
    )

# The event log round-trips losslessly and replays to the identical model.
log_text = export_log(session)
replayed = import_log(log_text)
same = replayed.fit_model() == model
print(f"\nlog lines: {len(log_text.splitlines())}, replay reproduces model: {same}")

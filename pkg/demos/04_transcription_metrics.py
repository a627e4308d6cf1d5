# Simulated transcription and text-entry metrics across keyboard layouts.
#
# A parametric user types prompts on each layout; we report accuracy of
# first attempts, words per minute, WPM* (space-adjacent keystrokes
# removed), and Wolpaw's information transfer rate.

import random
import statistics

from keyfitts import (
    SimulatedUser,
    anisotropic_model,
    build_grid,
    compute_metrics,
    generate_layout,
    ingest_phrases,
    qwerty_layout,
    simulate_transcription,
)
from keyfitts.corpus import bundled_phrases

phrases = bundled_phrases("eval500")
digraphs = ingest_phrases(phrases)
grid = build_grid(9, 9, 130)

aniso = anisotropic_model(130, a=0.83, b_vertical=0.5, horizontal_ratio=2.0)
layouts = {
    "personalized": generate_layout("personalized", aniso, digraphs, grid, seed=0),
    "optimized": generate_layout("generic", None, digraphs, grid, seed=0),
    "qwerty": qwerty_layout(),
}

user = SimulatedUser(aniso, mt_noise_sd=0.05, miss_rate=0.02, seed=11)
print(f"{'layout':<14} {'acc%':>7} {'wpm':>7} {'wpm*':>7} {'itr bits/min':>13}")
per_layout_itr = {}
for name, layout in layouts.items():
    itrs = []
    for set_idx in range(10):
        prompts = random.Random(400 + set_idx).sample(phrases, 10)
        trials = simulate_transcription(user, layout, prompts)
        report = compute_metrics(trials, layout)
        itrs.append(report.itr)
    report_all = compute_metrics(
        simulate_transcription(user, layout, random.Random(99).sample(phrases, 20)), layout
    )
    per_layout_itr[name] = statistics.mean(itrs)
    print(
        f"{name:<14} {report_all.accuracy:7.2f} {report_all.wpm:7.3f} "
        f"{report_all.wpm_star:7.3f} {statistics.mean(itrs):13.2f}"
    )

best = max(per_layout_itr, key=per_layout_itr.get)
print(f"\nhighest mean ITR for this user: {best}")

"""Machine-observer study: masked rendering vs direct downsizing.

Trains a compact classifier, then renders every pattern many times in
both modes and lets a fixed nearest-template observer guess the pattern
from the delivered 3x3 stimulus.  Direct rendering loses the position
information (it collapses to the center patterns); mask gating keeps all
twelve patterns apart, and stays far ahead as sensor noise grows.

Run:  python demos/05_observer_study.py
"""
from palmpipe import SimConfig, generate_dataset, split_dataset
from palmpipe.cnn import ArchConfig, TrainConfig, train
from palmpipe.eval import format_confusion, machine_observer_study
from palmpipe.pipeline import Mode

print("training a compact classifier (a few seconds)...")
dataset = generate_dataset(SimConfig(reps_per_config=4), seed=5)
train_set, val_set, _ = split_dataset(dataset, (0.5, 0.25, 0.25), seed=5)
params, _ = train(
    None, train_set, val_set,
    TrainConfig(epochs=8, batch_size=32, seed=5),
    arch=ArchConfig(conv_channels=(8, 12), head_widths=(64, 32, 16)),
)

print("\noverall recognition rate by sensor noise (100 trials per pattern):")
print(f"  {'noise sigma':>11}  {'direct':>7}  {'masked':>7}")
for sigma in (0.0, 0.15, 0.3, 0.6):
    direct = machine_observer_study(None, Mode.DIRECT, sigma, 100, seed=1)
    masked = machine_observer_study(params, Mode.MASKED, sigma, 100, seed=1)
    print(f"  {sigma:11.2f}  {direct.overall:7.3f}  {masked.overall:7.3f}")

print("\ndirect-mode confusion at 0.3 N noise (rows = rendered pattern):")
direct = machine_observer_study(None, Mode.DIRECT, 0.3, 100, seed=2)
print(format_confusion(direct.confusion))
print(
    "\nEvery block of three collapses onto its center pattern (ids 0, 3, 6, 9):"
    "\nthe 1.5-cell position shift is invisible after 10x10 -> 3x3 downsizing."
)

print("\nmasked-mode confusion at 0.3 N noise:")
masked = machine_observer_study(params, Mode.MASKED, 0.3, 100, seed=2)
print(format_confusion(masked.confusion))

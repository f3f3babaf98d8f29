"""How the four features respond to controlled scene changes.

Sweeps the synthetic scene's contrast and brightness knobs and tabulates
each feature, making the applicability ranges concrete: a feature only
gates its paired correction on while the image sits inside the range.
"""

import numpy as np

from utilenhance import DEFAULT_RANGES, extract_features

from _scenes import murky_scene


def main():
    print("contrast sweep (brightness fixed)")
    print(f"{'contrast':>8} {'gradient':>10} {'saturation':>11} {'entropy':>9} {'brightness':>11}")
    for c in (0.2, 0.5, 1.0, 2.0, 4.0):
        fv = extract_features(murky_scene(seed=21, contrast=c))
        print(f"{c:>8.1f} {fv.gradient:>10.5f} {fv.saturation:>11.3f} {fv.entropy:>9.3f} {fv.brightness:>11.3f}")

    print("\nbrightness sweep (contrast fixed)")
    print(f"{'offset':>8} {'gradient':>10} {'saturation':>11} {'entropy':>9} {'brightness':>11}")
    for b in (-40, -20, 0, 40, 90):
        fv = extract_features(murky_scene(seed=21, contrast=1.0, brightness=b))
        print(f"{b:>8d} {fv.gradient:>10.5f} {fv.saturation:>11.3f} {fv.entropy:>9.3f} {fv.brightness:>11.3f}")

    print("\napplicability ranges (closed intervals; inside = correction applies)")
    for name, (lo, hi) in DEFAULT_RANGES.as_dict().items():
        print(f"  {name:<11} [{lo}, {hi}]")

    print("\nA very bright image leaves the brightness range, so the gamma")
    print("correction gates off rather than over-brightening it further.")


if __name__ == "__main__":
    main()

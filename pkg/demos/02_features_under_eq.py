"""How the 17 timbral features respond to EQ moves.

Synthesizes a broadband note, applies a few hand-picked EQ settings, and shows
which features move. This is the intuition behind the whole pipeline: the
features must carry enough information to invert the gains.
"""

import numpy as np

from eqrep.audio import NoteSpec, synthesize_note
from eqrep.eq import apply_eq
from eqrep.features import FEATURE_NAMES, extract_features

SR = 44100

note = synthesize_note(NoteSpec("C2", 65.406, duration_s=2.0, partial_count=300), SR)
flat = extract_features(note).to_array()

settings = {
    "flat":            [0, 0, 0, 0, 0],
    "bass boost":      [12, 0, 0, 0, 0],
    "bass cut":        [-12, 0, 0, 0, 0],
    "presence boost":  [0, 0, 12, 12, 0],
    "air boost":       [0, 0, 0, 0, 12],
    "dark":            [0, 0, -8, -8, -12],
}

rows = {name: extract_features(apply_eq(note, gains)).to_array()
        for name, gains in settings.items()}

print(f"{'feature':<14s}" + "".join(f"{name:>16s}" for name in settings))
for i, fname in enumerate(FEATURE_NAMES):
    print(f"{fname:<14s}" + "".join(f"{rows[name][i]:>16.4f}" for name in settings))

print("\nObservations:")
centroids = {n: rows[n][0] for n in settings}
print(f"  air boost raises the centroid: {centroids['flat']:.0f} -> "
      f"{centroids['air boost']:.0f} Hz")
print(f"  dark lowers it:                {centroids['flat']:.0f} -> "
      f"{centroids['dark']:.0f} Hz")
print(f"  bass boost raises RMS: {rows['flat'][16]:.4f} -> {rows['bass boost'][16]:.4f}")

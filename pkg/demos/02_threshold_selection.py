"""How a membership threshold is chosen: the balanced-accuracy sweep.

Works directly on score lists, no models involved. Calibration-train
scores play the member role, calibration-test scores the non-member
role, and the threshold maximising (TPR + TNR)/2 is selected from the
observed values.
"""

import numpy as np

from memaudit import balanced_accuracy, best_threshold

rng = np.random.default_rng(0)

# member scores sit higher on average, with plenty of overlap
member_scores = np.clip(rng.normal(0.8, 0.15, size=40), 0.0, 1.0)
nonmember_scores = np.clip(rng.normal(0.55, 0.2, size=40), 0.0, 1.0)

print("sweep over every observed score value:")
candidates = np.unique(np.concatenate([member_scores, nonmember_scores]))
for tau in candidates[::8]:
    ba = balanced_accuracy(tau, member_scores, nonmember_scores)
    bar = "#" * int(40 * ba)
    print(f"  tau={tau:.3f}  BA={ba:.3f}  {bar}")

tau, ba = best_threshold(member_scores, nonmember_scores)
print(f"\nchosen threshold: tau={tau:.4f} with balanced accuracy {ba:.4f}")
print("(ties are broken toward the smallest candidate, which labels more")
print(" query points as members - the conservative side for removal claims)")

# degenerate case: identical score distributions leave nothing to separate
same = rng.random(30)
tau_same, ba_same = best_threshold(same, same)
print(f"\nidentical member/non-member scores: tau={tau_same:.4f}, BA={ba_same:.4f} (chance level)")

"""Walkthrough: correcting classifier-derived prevalence with BBSE.

A classifier trained on balanced data over-reports the minority class when
the deployment population is skewed. Black Box Shift Estimation inverts the
source confusion matrix against the target prediction marginal to recover
the true priors, without retraining anything.

Run:  python3 demos/05_label_shift.py
"""

import numpy as np

from netchoice import confusion_from_holdout, estimate_shift, fold_proportion

rng = np.random.default_rng(11)
CLASSES = ("CG", "P")  # caregiver vs patient update labels


def classify(labels, accuracy=0.88):
    """A stand-in black-box classifier that errs symmetrically."""
    flip = rng.uniform(size=len(labels)) >= accuracy
    flipped = np.where(np.asarray(labels) == "CG", "P", "CG")
    return list(np.where(flip, flipped, labels))


# Source: balanced holdout, the world the classifier was trained in.
source_labels = list(rng.choice(CLASSES, size=8000))
source_preds = classify(source_labels)
confusion = confusion_from_holdout(source_preds, source_labels, classes=CLASSES)
print("source joint confusion P(prediction, truth):")
print(np.round(confusion.matrix, 4))

# Target: mostly caregiver-authored, as a real feed would be.
true_target_prior = {"CG": 0.78, "P": 0.22}
target_labels = list(rng.choice(CLASSES, size=5000, p=[0.78, 0.22]))
target_preds = np.asarray(classify(target_labels))
raw_share = float((target_preds == "P").mean())
mu = np.array([(target_preds == c).mean() for c in CLASSES])

estimate = estimate_shift(confusion, mu)
print(f"\nraw classifier estimate of patient share: {raw_share:.4f}")
print(f"BBSE-corrected patient share:             {estimate.corrected[1]:.4f}")
print(f"true patient share:                       {true_target_prior['P']:.4f}")
print(f"prior ratio weights (target/source):      {np.round(estimate.weights, 3)}")
print(f"confusion condition number:               {estimate.condition_number:.2f}")

# Fold-based uncertainty, as when aggregating hold-one-out models: both the
# across-fold sd and sd/sqrt(F) are reported.
fold_estimates = []
for _ in range(25):
    sample = rng.choice(target_preds, size=2000, replace=True)
    fold_mu = np.array([(sample == c).mean() for c in CLASSES])
    fold_estimates.append(estimate_shift(confusion, fold_mu).corrected[1])
summary = fold_proportion(fold_estimates)
print(f"\nacross {summary.n_folds} folds: mean {summary.mean:.4f}, sd {summary.sd:.4f}, se {summary.se:.4f}")

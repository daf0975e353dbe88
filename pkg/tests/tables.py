"""Topic listings used as report-format fixtures."""
import numpy as np

TOPIC_A = [
    ("Type 2 diabetes mellitus", 0.369),
    ("Type II diabetes mellitus uncontrolled", 0.132),
    ("Mixed hyperlipidemia", 0.099),
    ("Disorder associated with type 2 diabetes mellitus", 0.088),
    ("Neurologic disorder associated with type 2 diabetes mellitus", 0.074),
    ("Proteinuria", 0.064),
    ("Morbid obesity", 0.063),
    ("Benign essential hypertension", 0.038),
    ("Vitamin D deficiency", 0.032),
    ("Diabetic oculopathy associated with type 2 diabetes mellitus", 0.029),
]
TOPIC_B = [
    ("Pain in limb", 0.195),
    ("Arthralgia of the lower leg", 0.166),
    ("Low back pain", 0.144),
    ("Shoulder joint pain", 0.128),
    ("Chronic renal failure", 0.107),
    ("Arthralgia of the pelvic region and thigh", 0.092),
    ("Thoracic radiculitis", 0.071),
    ("Joint pain", 0.036),
    ("Acute upper respiratory infection", 0.030),
    ("Chronic rhinitis", 0.029),
]
V = 180
# The three-decimal Topic A entries add to .988 while the expected
# cumulative is .989; the unrounded values must have carried the extra mass.
# Adding 1e-4 per entry keeps every entry's rounding and totals 0.989.
TOPIC_A_OFFSET = 1e-4


def fixture_phi_and_labels():
    codes = [f"S{j:03d}" for j in range(V)]
    labels = {}
    phi = np.zeros((2, V))
    for t, (topic, offset) in enumerate(((TOPIC_A, TOPIC_A_OFFSET), (TOPIC_B, 0.0))):
        base = 10 * t
        for k, (label, p) in enumerate(topic):
            phi[t, base + k] = p + offset
            labels[codes[base + k]] = label
        rest = [j for j in range(V) if not base <= j < base + 10]
        phi[t, rest] = (1 - phi[t].sum()) / len(rest)
    return phi, codes, labels


def fixture_model_dict():
    from emrlda.sampler import Hyperparameters, TopicModel

    phi, codes, _ = fixture_phi_and_labels()
    model = TopicModel(phi, np.empty((0, 2)), Hyperparameters(K=2), 1, tuple(codes), "fixture")
    return model.to_dict()


def write_label_map(path, labels):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["code", "label"])
        for code, label in labels.items():
            w.writerow([code, label])

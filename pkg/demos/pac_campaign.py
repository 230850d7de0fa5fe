"""Repeat learning many times and compare the success rate with the guarantee.

Run: python3 demos/pac_campaign.py
"""
from landmap.harness import ExperimentConfig, run_pac_campaign

config = ExperimentConfig.from_dict({
    "generator": {"kind": "grid", "width": 4, "height": 4,
                  "landmarks": {"count": 6, "target_r": 2}, "seed": 0},
    "learn": {"delta_g": 0.2, "alpha": 0.95, "gamma": 0.9, "c": 4},
    "trials": 20,
    "seed": 1,
})
report = run_pac_campaign(config)
print(report.summary())

# Each row is one independent run of the learner on the same world.
print(report.csv_text())

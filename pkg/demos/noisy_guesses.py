"""How many repeated traversals does a noisy guess oracle need?

Run: python3 demos/noisy_guesses.py
"""
from landmap.harness import filtering_experiment, run_separation_suite
from landmap.learner import num_filter_traversals

for gamma in (0.6, 0.75, 0.9):
    print(f"gamma={gamma}: {num_filter_traversals(gamma, 0.1)} traversals per candidate")

exp = filtering_experiment(0.95, 0.75, 0.1, n_true=10, n_false=10, reps=50, seed=3)
print(f"majority vote over {exp.n} traversals misclassifies "
      f"{exp.misclassification_rate:.3%} of candidate checks")

# Without a guess oracle, a robot that can retrace its steps separates real
# paths from single-error paths by how often the retrace lands back home.
report = run_separation_suite({"alpha": 0.9, "n": 1000, "lengths": [1, 2, 3], "candidates": 20})
print(report.summary())

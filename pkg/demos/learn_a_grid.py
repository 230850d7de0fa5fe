"""Learn a map of a small grid office and route between landmarks with it.

Run: python3 demos/learn_a_grid.py
"""
from landmap import LearnParams, World, gen_grid, global_path_query, learn_global, replay

# A 4x4 floor where only six junctions are recognizable; every other
# junction is at most two moves from one of them.
graph, partition = gen_grid(4, 4, [0, 3, 4, 6, 7, 9])
print("landmarks:", partition.landmark_names(), "r =", partition.r)

# The robot takes the intended corridor 95% of the time and guesses
# whether it followed an instruction sequence correctly 90% of the time.
world = World.create(graph, partition, alpha=0.95, gamma=0.9)
params = LearnParams.for_world(graph, partition, delta_g=0.2, alpha=0.95, gamma=0.9)
print(f"explore {params.explore_length} steps out, answer within stretch {params.stretch_bound}")

lmap = learn_global(world, params, seed=7)
print("steps taken:", {k: v for k, v in lmap.provenance.items() if k.startswith("steps")})

for u, v in [("L0", "L5"), ("L1", "L2")]:
    answer = global_path_query(lmap, u, v)
    if answer is None:
        print(f"{u} -> {v}: not connected in the learned map")
        continue
    end = replay(graph, partition.vertex_of(u), answer.labels)
    print(f"{u} -> {v}: via {' '.join(answer.waypoints)}, labels {' '.join(answer.labels)}, "
          f"arrives at {partition.name_of(end)}")

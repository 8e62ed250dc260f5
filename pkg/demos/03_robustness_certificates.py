"""Robustness certification with replayable evidence.

A point is reach-robust when, for every eps, some perturbation radius delta
keeps all delta-perturbed trajectories inside the eps-fattening of the true
reach.  The tool certifies the positive case with a radius checked at graph
level, and the negative case with an actual perturbed trajectory you can
replay step by step.
"""
from chainscope import Domain, Grid, replay_certificate, robustness_check, square

box = Domain.box([[0.0, 1.0]])
grid = Grid(box, 2 ** 14)

# -- x = 0: the attracting fixed point is robust ------------------------------
cert = robustness_check(square(), 0.0, eps=0.1, grid=grid)
print("x=0 verdict:", cert.verdict)
print("certified delta:", cert.delta_found)
print("replay passes:", replay_certificate(square(), cert, 0.0, grid))

# -- x = 1: the repelling fixed point is not ----------------------------------
schedule = [0.05 / 2 ** k for k in range(8)] + [2.0 ** -12]
cert = robustness_check(square(), 1.0, eps=0.1, delta_schedule=schedule,
                        grid=grid)
print("\nx=1 verdict:", cert.verdict)
print("radii tried:", [round(d, 6) for d, _ in cert.checked])
print("witness chain (first steps):")
for row in cert.witness[:6]:
    print(f"  step {row.step:>2}  x={row.point[0]:.9f}"
          f"  dist to true image = {row.dist_to_image:.2e}")
print(f"  ... {len(cert.witness)} steps total")
print(f"endpoint sits {cert.endpoint_distance:.3f} from the sampled reach "
      f"(> eps = {cert.eps})")
print("replay passes:", replay_certificate(square(), cert, 1.0, grid))
print("\nevery step stays within delta_min =", cert.delta_min,
      "of the exact image, so the chain is genuine, not a grid artifact")

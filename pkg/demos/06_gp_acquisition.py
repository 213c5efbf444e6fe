"""Surrogate fit and batch acquisition on a small latent-space stand-in."""

import numpy as np

from pathlso.gp import AcquisitionConfig, acquire_batch, expected_improvement, fit_gp, posterior

rng = np.random.default_rng(31)
x = rng.uniform(-2.0, 2.0, size=(30, 2))
y = np.sin(x[:, 0]) + 0.5 * x[:, 1] ** 2 + 3.0 + rng.normal(0.0, 0.3, 30)

gp = fit_gp(x, y)
print(f"grid search selected length scale {gp.length_scale:g}, "
      f"signal variance {gp.signal_var:g}, jitter {gp.jitter:g}")

print("\nposterior at three training points (mean tracks the target)")
for i in (0, 1, 2):
    mean, var = posterior(gp, x[i])
    print(f"  target {y[i]:7.3f}   mean {mean:7.3f}   variance {var:.2e}")

best = float(np.max(y))
far = np.array([4.0, -4.0])
print(f"\nexpected improvement over best {best:.3f}")
print(f"  at the best training point: {expected_improvement(gp, x[int(np.argmax(y))], best):.4f}")
print(f"  far from the data:          {expected_improvement(gp, far, best):.4f}")

cfg = AcquisitionConfig(batch_size=5, pool_size=256, min_separation=0.2)
top = x[np.argsort(-y)[:5]]
batch = acquire_batch(gp, cfg, top, np.random.default_rng(32))
print("\nacquired batch (greedy EI with min separation 0.2):")
for z in batch:
    mean, var = posterior(gp, z)
    print(f"  z = ({z[0]:+.3f}, {z[1]:+.3f})   predicted {mean:7.3f} +- {np.sqrt(var):.3f}")

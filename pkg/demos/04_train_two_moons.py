"""Train a small MLP on two moons and watch the threshold parameters move.

Each gating layer owns a trainable z (its sampling percentile); training
drifts them away from the 50% initialization, and the learned values
differ per layer.
"""

from ashlab import nn
from ashlab.activations import preset
from ashlab.harness.datasets import two_moons
from ashlab.stats import percentile_from_z

data = two_moons(256, noise=0.1, seed=1)
layers = [
    nn.Dense(2, 16), nn.Activation(preset("ash")),
    nn.Dense(16, 16), nn.Activation(preset("ash")),
    nn.Dense(16, 2),
]
model = nn.Model(layers, seed=0)
config = nn.TrainConfig(epochs=300, batch_size=32, seed=0,
                        optimizer=nn.OptimizerSpec(kind="adam", lr=1e-3))

records = nn.train(model, config, data)
loss, acc = nn.evaluate(model, *data)
print(f"final train loss {loss:.4f}, accuracy {acc:.3f}\n")

print("epoch   loss     z(act1)   z(act3)")
for r in records[:: max(1, len(records) // 10)]:
    print(f"{r.epoch:>5} {r.train_loss:>8.4f} {r.zk_snapshot['act1'][0]:>9.4f}"
          f" {r.zk_snapshot['act3'][0]:>9.4f}")

print("\nlearned thresholds as sampling percentiles:")
for name, values in model.zk_snapshot().items():
    print(f"  {name}: z = {values[0]:+.4f}  ->  keeps top {percentile_from_z(values[0]):.1f}%")

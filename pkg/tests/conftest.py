import pytest

from evspike.datasets import make_synthetic_nmnist

SYNTH_CONFIG_TOML = """\
[dataset]
kind = "nmnist"
path = "{path}"
classes = [0, 1]
dt_ms = 2.0

[neuron]
kind = "lif"
tau_m_ms = 10.0

[stdp]
a_plus = 0.01
a_minus = -0.005

[threshold]
lambda = 0.4

[architecture]
populations = 8
kernel_size = 5

[run]
repeats = {repeats}
seed = {seed}
out_dir = "{out_dir}"
"""


@pytest.fixture(scope="session")
def synth_dataset(tmp_path_factory):
    """Two-class oriented-bar dataset in the N-MNIST layout, 60 train / 40 test."""
    root = tmp_path_factory.mktemp("synth-nmnist")
    make_synthetic_nmnist(root, n_train_per_class=30, n_test_per_class=20, seed=0)
    return root


def synth_config_text(path, out_dir, repeats=1, seed=1):
    return SYNTH_CONFIG_TOML.format(
        path=path, out_dir=out_dir, repeats=repeats, seed=seed
    )

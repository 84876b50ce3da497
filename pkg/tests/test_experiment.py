"""Config round-trip, dataset loading, training determinism, and the HPO
wiring over the synthetic fixture dataset."""

import json
from dataclasses import replace

import numpy as np
import pytest

from conftest import synth_config_text
from evspike.classifier import UNASSIGNED
from evspike.datasets import load_dataset, make_synthetic_nmnist
from evspike.experiment import (
    ArchitectureConfig,
    ConfigError,
    DatasetConfig,
    ExperimentConfig,
    NeuronConfig,
    RunReport,
    apply_hpo_values,
    build_search_space,
    evaluate_checkpoint,
    hpo_split,
    load_split_samples,
    parse_config,
    reference_config_text,
    run_experiment,
    run_hpo_campaign,
    serialize_config,
    train_and_evaluate,
)
from evspike.network import StdpConfig, SynapticKernel
from evspike.neurons import NeuronModelKind


def synth_cfg(root, **kw):
    cfg = parse_config(synth_config_text(root, out_dir=str(root / "out")))
    return replace(cfg, **kw) if kw else cfg


class TestConfigRoundTrip:
    def test_parse_serialize_identity(self, tmp_path):
        cfg = synth_cfg(tmp_path)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_round_trip_with_model_specific_fields(self, tmp_path):
        for kind in ("qif", "eif"):
            cfg = synth_cfg(tmp_path)
            cfg = replace(cfg, neuron=replace(cfg.neuron, kind=NeuronModelKind(kind)))
            again = parse_config(serialize_config(cfg))
            assert again == cfg

    def test_unknown_key_rejected_by_name(self, tmp_path):
        text = synth_config_text(tmp_path, tmp_path) + "\n[neuron]\nbogus_knob = 1\n"
        # appending a duplicate section is invalid TOML; inject instead
        text = synth_config_text(tmp_path, tmp_path).replace(
            'kind = "lif"', 'kind = "lif"\nbogus_knob = 1'
        )
        with pytest.raises(ConfigError, match="bogus_knob"):
            parse_config(text)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="section"):
            parse_config("[dataset]\nkind='nmnist'\npath='x'\nclasses=[0,1]\n[woo]\na=1")

    def test_class_count_enforced(self):
        with pytest.raises(ConfigError, match="two distinct"):
            parse_config('[dataset]\nkind="nmnist"\npath="x"\nclasses=[0,1,2]')

    def test_reference_config_parses(self):
        cfg = parse_config(reference_config_text())
        assert cfg.repeats == 11
        assert cfg.neuron.kind is NeuronModelKind.LIF

    def test_model_defaults_filled_by_kind(self):
        qif = NeuronConfig(kind="qif")
        assert qif.a0 is not None and qif.u_c_frac is not None
        assert qif.delta_t is None
        eif = NeuronConfig(kind="eif")
        assert eif.delta_t is not None and eif.theta_rh_frac is not None


class TestDatasetLoading:
    def test_split_sizes_and_balance(self, synth_dataset):
        train = load_dataset("nmnist", synth_dataset, (0, 1), "train")
        test = load_dataset("nmnist", synth_dataset, (0, 1), "test")
        assert len(train) == 60 and len(test) == 40
        assert sum(1 for s in train if s.label == 0) == 30

    def test_cap_keeps_classes_balanced(self, synth_dataset):
        capped = load_dataset("nmnist", synth_dataset, (0, 1), "train", 11)
        labels = [s.label for s in capped]
        assert len(capped) == 11
        assert abs(labels.count(0) - labels.count(1)) <= 1

    def test_unknown_kind(self, synth_dataset):
        with pytest.raises(ValueError, match="kind"):
            load_dataset("hdf5", synth_dataset, (0, 1), "train")


class TestTraining:
    def test_learns_above_chance(self, synth_dataset, tmp_path):
        cfg = synth_cfg(synth_dataset, repeats=5, seed=1)
        train, test = load_split_samples(cfg)
        report, outcomes = run_experiment(cfg, train, test)
        assert report.mean >= 0.70
        assert all(0.0 <= a <= 1.0 for a in report.accuracies)

    def test_report_consistency(self, synth_dataset):
        cfg = synth_cfg(synth_dataset, repeats=3, seed=1)
        report, _ = run_experiment(cfg)
        assert report.mean == pytest.approx(np.mean(report.accuracies), abs=1e-12)
        assert report.std == pytest.approx(np.std(report.accuracies, ddof=1), abs=1e-12)
        assert report.best == max(report.accuracies)

    def test_deterministic_over_reruns(self, synth_dataset):
        cfg = synth_cfg(synth_dataset, repeats=2, seed=4)
        r1, o1 = run_experiment(cfg)
        r2, o2 = run_experiment(cfg)
        assert r1.accuracies == r2.accuracies
        for a, b in zip(o1, o2):
            assert np.array_equal(a.kernel, b.kernel)
            assert a.predictions == b.predictions

    def test_worker_pool_matches_sequential(self, synth_dataset):
        cfg = synth_cfg(synth_dataset, repeats=2, seed=2)
        seq, seq_out = run_experiment(cfg)
        par, par_out = run_experiment(replace(cfg, workers=2))
        assert seq.accuracies == par.accuracies
        for a, b in zip(seq_out, par_out):
            assert np.array_equal(a.kernel, b.kernel)

    def test_checkpoint_evaluation_matches_training_eval(self, synth_dataset):
        cfg = synth_cfg(synth_dataset, seed=1)
        train, test = load_split_samples(cfg)
        outcome = train_and_evaluate(cfg, train, test, seed=cfg.seed)
        acc, preds = evaluate_checkpoint(
            cfg, SynapticKernel(outcome.kernel), outcome.label_map, test
        )
        assert acc == outcome.accuracy
        assert preds == outcome.predictions


class TestHpoWiring:
    def test_search_space_by_model(self):
        lif = build_search_space(NeuronModelKind.LIF)
        qif = build_search_space(NeuronModelKind.QIF)
        eif = build_search_space(NeuronModelKind.EIF)
        names = {p.name for p in lif.params}
        assert names == {"tau_m_ms", "lambda", "a_plus", "a_minus_mag", "dt_ms"}
        assert {p.name for p in qif.params} - names == {"a0", "u_c_frac"}
        assert {p.name for p in eif.params} - names == {"delta_t", "theta_rh_frac"}

    def test_apply_values_materializes_config(self, synth_dataset):
        cfg = synth_cfg(synth_dataset)
        values = {
            "tau_m_ms": 22.0, "lambda": 0.4, "a_plus": 0.02,
            "a_minus_mag": 0.004, "dt_ms": 5.0,
        }
        out = apply_hpo_values(cfg, values)
        assert out.neuron.tau_m_ms == 22.0
        assert out.lam == 0.4
        assert out.stdp.a_minus == -0.004
        assert out.dataset.dt_ms == 5.0

    def test_split_is_deterministic_and_disjoint(self, synth_dataset):
        cfg = synth_cfg(synth_dataset)
        train, _ = load_split_samples(cfg)
        p1, v1 = hpo_split(cfg, train)
        p2, v2 = hpo_split(cfg, train)
        assert [id(s) for s in p1] == [id(s) for s in p2]
        assert len(p1) + len(v1) == len(train)

    def test_small_campaign_runs_and_logs(self, synth_dataset, tmp_path):
        cfg = synth_cfg(synth_dataset, seed=3)
        cfg = replace(cfg, hpo=replace(cfg.hpo, max_budget=9, eta=3))
        train, _ = load_split_samples(cfg)
        log = tmp_path / "campaign.jsonl"
        best, history = run_hpo_campaign(
            cfg, train_samples=train[:30], log_path=log, iterations=6
        )
        assert len({t.config.trial_id for t in history}) == 6
        assert 0.0 <= best.objective <= 1.0
        assert log.exists()
        records = [json.loads(l) for l in log.read_text().splitlines()]
        assert len(records) == len(history)


class TestAllModelsTrain:
    @pytest.mark.parametrize("kind", ["qif", "eif"])
    def test_nonlinear_models_run_end_to_end(self, synth_dataset, kind):
        cfg = synth_cfg(synth_dataset, seed=1)
        cfg = replace(
            cfg,
            neuron=replace(cfg.neuron, kind=NeuronModelKind(kind)),
            dataset=replace(cfg.dataset, max_train=16, max_test=10),
        )
        train, test = load_split_samples(cfg)
        outcome = train_and_evaluate(cfg, train, test, seed=1)
        assert 0.0 <= outcome.accuracy <= 1.0
        # the threshold anchoring keeps the run alive: weights moved, so
        # spikes happened and STDP fired
        assert not np.allclose(outcome.kernel, outcome.kernel[0, 0, 0, 0])

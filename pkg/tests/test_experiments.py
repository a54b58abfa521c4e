import json

import numpy as np
import pytest

from ccq.channels import ChoiOperator, ChoiSet, identity_choi
from ccq.densemath import max_entangled
from ccq.divergences import InvariantViolation, comp_hmin_pure
from ccq.experiments import (
    GAP_COLUMNS,
    ConfigError,
    ExperimentConfig,
    GapRecord,
    copies_density,
    copies_ket,
    jsonable,
    records_csv,
    run_gap_report,
    run_separation_mixed,
    run_separation_pure,
    summarize,
)

CONFIG = """
[experiment]
ensemble = haar_subsystem
n_A = 1
n_B = 1
m = 1
k = 2
samples = 4
seed = 3

[budget]
gateset = clifford_hsc
G = 2
a_max = 1

[output]
reference_channels = true
"""


def test_config_parsing():
    cfg = ExperimentConfig.from_text(CONFIG)
    assert cfg.ensemble == "haar_subsystem" and cfg.k == 2 and cfg.a_max == 1
    assert cfg.reference_channels is True
    assert cfg.epsilon == 0.3


@pytest.mark.parametrize("text", [
    "[experiment]\nensemble = nope\n",
    "[experiment]\nk = two\n",
    "[experiment]\nunknown = 1\n",
    "[mystery]\nk = 1\n",
    "[budget]\ngateset = nonexistent\n",
    "[experiment]\nsamples = 0\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text)


def test_custom_gateset_section():
    cfg = ExperimentConfig.from_text(
        "[budget]\ngateset = custom\nG = 1\n[gateset.custom]\nV = 1,0 0,0; 0,0 0,1\n"
    )
    assert "V" in cfg.gate_set().labels


def test_copies_ordering():
    v = max_entangled(2).vec
    w = copies_ket(v, 2, 2, 2)
    # A1 A2 B1 B2 ordering makes two Bell pairs a 4-dim maximally entangled state
    assert np.allclose(w, max_entangled(4).vec)
    m = copies_density(np.outer(v, v.conj()), 2, 2, 2)
    assert np.allclose(m, np.outer(w, w.conj()))


def test_identity_witness_for_two_copies():
    cs = ChoiSet([ChoiOperator.from_matrix(identity_choi(4), 4, 4, "-")], 4, 4, "clifford_hsc")
    w = copies_ket(max_entangled(2).vec, 2, 2, 2)
    rep = comp_hmin_pure(w, cs, informational=-2.0)
    assert abs(rep.computational + 2) < 1e-12 and abs(rep.gap) < 1e-12


def test_separation_pure_records():
    cfg = ExperimentConfig.from_text(CONFIG)
    recs = run_separation_pure(cfg)
    assert len(recs) == 4
    for r in recs:
        assert r.gap >= -1e-7
        assert abs(r.gap - (r.computational - r.informational)) < 1e-12
        assert r.informational >= -cfg.k * cfg.m - 1e-9
        assert r.computational <= cfg.k * cfg.n_A + 1e-9
        assert r.diagnostics["concentration_achieved_tp"] >= r.informational - 1e-7
    s = summarize(recs, cfg)
    assert s["samples"] == 4 and s["min_gap"] >= -1e-7


def test_separation_mixed_records():
    cfg = ExperimentConfig(ensemble="ghse", n_A=1, n_B=1, m=1, k=1, samples=3, seed=2, G=1)
    recs = run_separation_mixed(cfg)
    for r in recs:
        assert r.gap >= -1e-7
        assert r.diagnostics["hmin_single"] <= r.diagnostics["h_cond"] + 1e-7
        assert r.diagnostics["sdp_gap"] < 1e-7


def test_mixed_with_m_zero_matches_pure():
    cfg = ExperimentConfig(ensemble="ghse", n_A=1, n_B=1, m=0, k=1, samples=2, seed=4, G=1)
    for r in run_separation_mixed(cfg):
        assert abs(r.diagnostics["h_joint"]) < 1e-9


def test_ensemble_mismatch():
    with pytest.raises(ConfigError):
        run_separation_mixed(ExperimentConfig(ensemble="haar_pure"))
    with pytest.raises(ConfigError):
        run_separation_pure(ExperimentConfig(ensemble="ghse"))


def test_gap_report():
    cfg = ExperimentConfig(ensemble="haar_pure", samples=3, seed=1, G=1)
    assert run_gap_report(cfg) == ",".join(GAP_COLUMNS) + "\n"
    cfg.k_values = [1, 2, 3]
    lines = run_gap_report(cfg).strip().splitlines()
    assert len(lines) == 4
    info = [float(line.split(",")[3]) for line in lines[1:]]
    assert np.allclose(np.array(info) / np.array([1, 2, 3]), info[0], atol=1e-12)
    cfg = ExperimentConfig(ensemble="ghse", family="mixed", samples=2, seed=1, G=1, m=1, k_values=[1])
    row = run_gap_report(cfg).strip().splitlines()[1].split(",")
    assert float(row[4]) >= float(row[3]) - 1e-7


def test_gap_record_invariant_and_json():
    with pytest.raises(InvariantViolation):
        GapRecord("x", 1.0, 0.0, -1.0, "-")
    r = GapRecord("x", 0.0, np.inf, np.inf, "-", {"a": np.float64(1.5)})
    assert json.loads(r.to_json())["computational"] == "inf"
    assert jsonable(np.array([1, 2])) == [1, 2]
    assert records_csv([]).startswith("state_id,")

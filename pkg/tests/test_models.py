import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from kaddshap import (
    BackgroundSet,
    FitError,
    FrameError,
    HandshakeError,
    LinearModel,
    PredictionCountError,
    RemoteModelClient,
    SyntheticInteractionModel,
    TransportTimeout,
    explain_exact,
    interaction_pair,
    is_k_additive,
    serve_check,
)
from kaddshap.explainers import full_powerset_sample, build_value_function
from kaddshap.games import Game

SERVER = Path(__file__).parent / "protoserver.py"
TRANSCRIPT = Path(__file__).parent / "data" / "transcript_echo.jsonl"


def server_cmd(mode="echo"):
    return f"{sys.executable} {SERVER} {mode}"


# --- built-in models ------------------------------------------------------


def test_linear_fit_recovers_noise_free_slope():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = 2.0 * X[:, 0]
    model = LinearModel.fit(X, y)
    assert model.coef_ == pytest.approx([2.0, 0.0, 0.0], abs=1e-9)
    assert model.intercept_ == pytest.approx(0.0, abs=1e-9)


def test_linear_fit_constant_target():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 4))
    model = LinearModel.fit(X, np.full(20, 7.5))
    assert np.max(np.abs(model.coef_)) < 1e-9
    assert model.intercept_ == pytest.approx(7.5, abs=1e-9)


def test_linear_fit_planted_coefficients():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, 6))
    beta = rng.normal(size=6)
    intercept = 1.25
    model = LinearModel.fit(X, intercept + X @ beta)
    assert np.max(np.abs(model.coef_ - beta)) < 1e-8
    assert abs(model.intercept_ - intercept) < 1e-8


def test_linear_fit_rejects_singular_design():
    rng = np.random.default_rng(3)
    col = rng.normal(size=20)
    X = np.column_stack([col, col, rng.normal(size=20)])
    with pytest.raises(FitError, match="singular"):
        LinearModel.fit(X, rng.normal(size=20))
    with pytest.raises(FitError):
        LinearModel.fit(rng.normal(size=(3, 5)), rng.normal(size=3))


def test_synthetic_planted_pair_interaction():
    # f = x1*x2 over binary data, uniform binary background:
    # the induced game's pair index is 0.25 (frozen from the defining sum)
    model = SyntheticInteractionModel([(1.0, (0, 1))])
    bg = BackgroundSet.full(
        np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    )
    x = np.ones(2)
    vf = build_value_function(model, x, full_powerset_sample(2), bg)
    payoffs = vf.values_for(full_powerset_sample(2).masks) - vf.phi0
    game = Game.dense(2, payoffs)
    assert interaction_pair(game, 0, 1) == pytest.approx(0.25, abs=1e-12)


def test_synthetic_empty_spec_is_zero():
    model = SyntheticInteractionModel([])
    assert np.all(model.predict_batch(np.ones((5, 3))) == 0.0)
    assert model.degree == 0


def test_synthetic_degree_three_breaks_two_additivity():
    model = SyntheticInteractionModel([(1.0, (0, 1, 2)), (0.5, (0,))])
    bg = BackgroundSet.full(np.zeros((1, 3)))
    x = np.ones(3)
    vf = build_value_function(model, x, full_powerset_sample(3), bg)
    payoffs = vf.values_for(full_powerset_sample(3).masks) - vf.phi0
    game = Game.dense(3, payoffs)
    assert not is_k_additive(game, 2, tol=1e-9)
    assert is_k_additive(game, 3, tol=1e-9)


def test_synthetic_rejects_bad_terms():
    with pytest.raises(ValueError):
        SyntheticInteractionModel([(1.0, (0, 0))])
    model = SyntheticInteractionModel([(1.0, (7,))])
    with pytest.raises(ValueError, match="beyond"):
        model.predict_batch(np.ones((2, 3)))


# --- remote client --------------------------------------------------------


def test_echo_server_round_trip():
    with RemoteModelClient(3, command=server_cmd()) as client:
        X = np.array([[1.5, 2.0, 3.0], [0.25, -1.0, 4.0]])
        assert client.predict_batch(X).tolist() == [1.5, 0.25]


def test_wrong_count_is_detected():
    with RemoteModelClient(2, command=server_cmd("wrong-count")) as client:
        with pytest.raises(PredictionCountError, match="expected 2"):
            client.predict_batch(np.ones((2, 2)))


def test_wrong_id_is_detected():
    with RemoteModelClient(2, command=server_cmd("wrong-id")) as client:
        with pytest.raises(PredictionCountError, match="id"):
            client.predict_batch(np.ones((2, 2)))


def test_malformed_frame_is_detected():
    with RemoteModelClient(2, command=server_cmd("malformed")) as client:
        with pytest.raises(FrameError):
            client.predict_batch(np.ones((2, 2)))


def test_handshake_mismatch():
    with pytest.raises(HandshakeError):
        RemoteModelClient(2, command=server_cmd("bad-handshake"))


def test_timeout():
    client = RemoteModelClient(2, command=server_cmd("sleepy"), timeout=0.3)
    try:
        with pytest.raises(TransportTimeout):
            client.predict_batch(np.ones((1, 2)))
    finally:
        client.shutdown()


def test_golden_transcript_round_trip():
    """Replaying the recorded session gives byte-identical frames."""
    recorded = TRANSCRIPT.read_bytes().splitlines(keepends=True)
    client_lines = [l[2:] for l in recorded if l.startswith(b"C ")]
    server_lines = [l[2:] for l in recorded if l.startswith(b"S ")]

    # server side: feed recorded client frames, compare emitted bytes
    proc = subprocess.run(
        [sys.executable, str(SERVER), "echo"],
        input=b"".join(client_lines),
        stdout=subprocess.PIPE,
        timeout=30,
    )
    assert proc.stdout == b"".join(server_lines)

    # client side: a fresh session with the same batches emits the same frames
    log = []
    client = RemoteModelClient(3, command=server_cmd(), frame_log=log)
    client.predict_batch(np.array([[1.5, 2.0, 3.0], [0.25, -1.0, 4.0]]))
    client.predict_batch(np.array([[-0.125, 0.5, 0.75]]))
    client.shutdown()
    replayed = b"".join(
        (b"C " if direction == "send" else b"S ") + data for direction, data in log
    )
    assert replayed == TRANSCRIPT.read_bytes()


def test_serve_check_passes_on_conforming_server():
    report = serve_check(3, command=server_cmd(), batches=25, seed=0)
    assert report.ok
    assert report.batches == 25


def test_serve_check_flags_violations():
    report = serve_check(3, command=server_cmd("wrong-count"), batches=5, seed=0)
    assert not report.ok
    assert report.batches == 0


def test_explaining_through_remote_model():
    rng = np.random.default_rng(4)
    bg = BackgroundSet.full(rng.normal(size=(6, 3)))
    with RemoteModelClient(3, command=server_cmd()) as client:
        x = np.array([2.0, 0.0, 0.0])
        result = explain_exact(client, x, bg)
    # echo-first-feature behaves like f(x) = x_0
    assert result.shap_values[0] == pytest.approx(
        2.0 - bg.samples[:, 0].mean(), abs=1e-9
    )
    assert abs(result.shap_values[1]) < 1e-9
    assert result.efficiency_gap < 1e-9

"""Dual recurrent encoder with regression head, forward and backward passes.

A single gated recurrent cell (shared between the two input sequences)
encodes each token-vector sequence into its final hidden state. The two
encodings are combined symmetrically as [e_a + e_b ; |e_a - e_b|] and fed
through a two-layer tanh head whose final tanh keeps the predicted
correlation inside [-1, 1]. All math is float64 so that gradients can be
checked strictly against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (name, fan_out_key, fan_in_key); matrices are stored (fan_out, fan_in).
_MATRIX_SPECS = [
    ("w_z", "h", "d"), ("u_z", "h", "h"),
    ("w_r", "h", "d"), ("u_r", "h", "h"),
    ("w_c", "h", "d"), ("u_c", "h", "h"),
    ("head_w1", "m", "two_h"), ("head_w2", "one", "m"),
]
_BIAS_SPECS = [("b_z", "h"), ("b_r", "h"), ("b_c", "h"), ("head_b1", "m"), ("head_b2", "one")]


@dataclass
class ModelParams:
    d: int
    h: int
    m: int
    weights: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(self.d, self.h, self.m, {k: v.copy() for k, v in self.weights.items()})

    def flat_names(self) -> list[str]:
        return sorted(self.weights)

    def assert_finite(self) -> None:
        for name, w in self.weights.items():
            if not np.all(np.isfinite(w)):
                raise FloatingPointError(f"non-finite values in parameter {name}")


def init_params(d: int, h: int, m: int, seed: int = 0) -> ModelParams:
    """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    if min(d, h, m) < 1:
        raise ValueError("d, h, m must all be >= 1")
    sizes = {"d": d, "h": h, "m": m, "two_h": 2 * h, "one": 1}
    rng = np.random.default_rng(seed)
    weights: dict[str, np.ndarray] = {}
    for name, out_key, in_key in _MATRIX_SPECS:
        fan_out, fan_in = sizes[out_key], sizes[in_key]
        s = np.sqrt(6.0 / (fan_in + fan_out))
        weights[name] = rng.uniform(-s, s, size=(fan_out, fan_in))
    for name, size_key in _BIAS_SPECS:
        weights[name] = np.zeros(sizes[size_key])
    return ModelParams(d, h, m, weights)


def zero_grads(params: ModelParams) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.weights.items()}


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class _StepTrace:
    x: np.ndarray
    h_prev: np.ndarray
    z: np.ndarray
    r: np.ndarray
    c: np.ndarray


@dataclass
class ForwardTrace:
    steps_a: list[_StepTrace]
    steps_b: list[_StepTrace]
    e_a: np.ndarray
    e_b: np.ndarray
    combined: np.ndarray
    u1: np.ndarray
    r_hat: float


@dataclass(frozen=True)
class Prediction:
    r_hat: float


def _gru_forward(seq, w) -> list[_StepTrace]:
    h = np.zeros_like(w["b_z"])
    steps = []
    for x in seq:
        z = _sigmoid(w["w_z"] @ x + w["u_z"] @ h + w["b_z"])
        r = _sigmoid(w["w_r"] @ x + w["u_r"] @ h + w["b_r"])
        c = np.tanh(w["w_c"] @ x + w["u_c"] @ (r * h) + w["b_c"])
        steps.append(_StepTrace(np.asarray(x, dtype=np.float64), h, z, r, c))
        h = (1.0 - z) * h + z * c
    return steps


def _final_state(steps: list[_StepTrace]) -> np.ndarray:
    last = steps[-1]
    return (1.0 - last.z) * last.h_prev + last.z * last.c


def encode(seq, params: ModelParams) -> np.ndarray:
    """Final hidden state of the recurrent cell over a non-empty sequence."""
    if len(seq) == 0:
        raise ValueError("cannot encode an empty sequence")
    return _final_state(_gru_forward(seq, params.weights))


def predict_pair(seq_a, seq_b, params: ModelParams) -> tuple[Prediction, ForwardTrace]:
    """Predict the correlation for a pair of embedded sequences.

    Symmetric by construction: both orders produce bit-identical output.
    """
    w = params.weights
    steps_a = _gru_forward(seq_a, w)
    steps_b = _gru_forward(seq_b, w)
    e_a, e_b = _final_state(steps_a), _final_state(steps_b)
    combined = np.concatenate([e_a + e_b, np.abs(e_a - e_b)])
    u1 = np.tanh(w["head_w1"] @ combined + w["head_b1"])
    r_hat = float(np.tanh(w["head_w2"] @ u1 + w["head_b2"])[0])
    return Prediction(r_hat), ForwardTrace(steps_a, steps_b, e_a, e_b, combined, u1, r_hat)


def _gru_backward(steps: list[_StepTrace], d_final: np.ndarray, w, grads) -> None:
    dh = d_final
    for st in reversed(steps):
        dc = dh * st.z
        dz = dh * (st.c - st.h_prev)
        da_c = dc * (1.0 - st.c ** 2)
        da_z = dz * st.z * (1.0 - st.z)
        uc_dac = w["u_c"].T @ da_c
        dr = uc_dac * st.h_prev
        da_r = dr * st.r * (1.0 - st.r)

        grads["w_z"] += np.outer(da_z, st.x)
        grads["u_z"] += np.outer(da_z, st.h_prev)
        grads["b_z"] += da_z
        grads["w_r"] += np.outer(da_r, st.x)
        grads["u_r"] += np.outer(da_r, st.h_prev)
        grads["b_r"] += da_r
        grads["w_c"] += np.outer(da_c, st.x)
        grads["u_c"] += np.outer(da_c, st.r * st.h_prev)
        grads["b_c"] += da_c

        dh = (dh * (1.0 - st.z)
              + w["u_z"].T @ da_z
              + w["u_r"].T @ da_r
              + uc_dac * st.r)


def backward(trace: ForwardTrace, upstream: float, params: ModelParams) -> dict[str, np.ndarray]:
    """Exact gradients of upstream * d r_hat / d theta for every parameter.

    The encoder is shared, so both sequences' contributions accumulate into
    the same recurrent weight gradients. The absolute-difference block uses
    the subgradient sign(e_a - e_b), with sign(0) = 0.
    """
    w = params.weights
    grads = zero_grads(params)
    h = params.h

    da2 = upstream * (1.0 - trace.r_hat ** 2)
    grads["head_w2"][0, :] = da2 * trace.u1
    grads["head_b2"][0] = da2
    du1 = w["head_w2"][0] * da2
    da1 = du1 * (1.0 - trace.u1 ** 2)
    grads["head_w1"] += np.outer(da1, trace.combined)
    grads["head_b1"] += da1
    d_combined = w["head_w1"].T @ da1

    sign = np.sign(trace.e_a - trace.e_b)
    d_ea = d_combined[:h] + d_combined[h:] * sign
    d_eb = d_combined[:h] - d_combined[h:] * sign
    _gru_backward(trace.steps_a, d_ea, w, grads)
    _gru_backward(trace.steps_b, d_eb, w, grads)
    return grads


def save_checkpoint(params: ModelParams, path) -> None:
    """Exact (bit-preserving) serialization of dims and all matrices."""
    np.savez(path,
             __format_version=np.array([1]),
             __dims=np.array([params.d, params.h, params.m]),
             **params.weights)


def load_checkpoint(path) -> ModelParams:
    with np.load(path) as data:
        if int(data["__format_version"][0]) != 1:
            raise ValueError("unsupported checkpoint version")
        d, h, m = (int(v) for v in data["__dims"])
        weights = {k: data[k].astype(np.float64) for k in data.files
                   if not k.startswith("__")}
    return ModelParams(d, h, m, weights)

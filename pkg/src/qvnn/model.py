"""Network description and JSON config handling.

A model is the tuple (C, A, B, delta, d1, d2, mu1, mu2, Gamma) plus optional
delay waveforms, a constant external input, and a known equilibrium. C and
Gamma are positive real diagonals; A (instantaneous coupling) and B (delayed
coupling) are quaternion matrices. The certification side consumes only the
scalar bounds; the simulation side additionally needs the delay waveforms and
the activation gains, which coincide with the diagonal of Gamma.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .qmatrix import QuatMatrix, qmat_from_json, qmat_to_json, qv_from_components

_DELAY_KINDS = ("constant", "sinusoid")


@dataclass(frozen=True)
class DelaySpec:
    """A scalar delay waveform: constant, or offset sinusoid, clamped at zero.

    The reported ``bound``/``rate_bound`` ignore clamping (they bound the raw
    waveform), which keeps them valid bounds for the clamped one as well.
    """

    kind: str = "constant"
    value: float = 0.0          # constant kind
    amplitude: float = 0.0      # sinusoid kind: amplitude * sin(omega t + phase) + offset
    offset: float = 0.0
    phase: float = 0.0
    omega: float = 1.0
    clamp_negative: bool = True

    def __post_init__(self):
        if self.kind not in _DELAY_KINDS:
            raise InputError(f"unknown delay kind {self.kind!r}")
        if self.kind == "constant" and self.value < 0 and self.clamp_negative is False:
            raise InputError("constant delay must be nonnegative")
        if self.amplitude < 0:
            raise InputError("sinusoid amplitude must be nonnegative")

    def bound(self) -> float:
        if self.kind == "constant":
            return max(self.value, 0.0)
        return self.amplitude + self.offset

    def rate_bound(self) -> float:
        if self.kind == "constant":
            return 0.0
        return self.amplitude * abs(self.omega)

    def __call__(self, t):
        if self.kind == "constant":
            raw = np.full_like(np.asarray(t, dtype=float), max(self.value, 0.0))
        else:
            raw = self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float)
                                          + self.phase) + self.offset
        if self.clamp_negative:
            raw = np.maximum(raw, 0.0)
        if np.ndim(t) == 0:
            return float(raw)
        return raw

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value,
                    "clamp_negative": self.clamp_negative}
        return {"kind": "sinusoid", "amplitude": self.amplitude,
                "offset": self.offset, "phase": self.phase, "omega": self.omega,
                "clamp_negative": self.clamp_negative}

    @classmethod
    def from_json(cls, payload: dict) -> "DelaySpec":
        if not isinstance(payload, dict):
            raise InputError("delay spec must be an object")
        kind = payload.get("kind", "constant")
        clamp = bool(payload.get("clamp_negative", True))
        try:
            if kind == "constant":
                return cls(kind="constant", value=float(payload.get("value", 0.0)),
                           clamp_negative=clamp)
            if kind == "sinusoid":
                return cls(kind="sinusoid",
                           amplitude=float(payload["amplitude"]),
                           offset=float(payload.get("offset", 0.0)),
                           phase=float(payload.get("phase", 0.0)),
                           omega=float(payload.get("omega", 1.0)),
                           clamp_negative=clamp)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed delay spec: {exc}") from None
        raise InputError(f"unknown delay kind {kind!r}")


@dataclass
class NetworkModel:
    n: int
    c_diag: np.ndarray
    a_mat: QuatMatrix
    b_mat: QuatMatrix
    delta: float
    d1_bound: float
    d2_bound: float
    mu1: float
    mu2: float
    gamma_diag: np.ndarray
    delay1: DelaySpec = field(default_factory=DelaySpec)
    delay2: DelaySpec = field(default_factory=DelaySpec)
    external_input: np.ndarray | None = None   # pair form (2, n) or None
    equilibrium: np.ndarray | None = None      # pair form (2, n) or None

    def __post_init__(self):
        self.c_diag = np.asarray(self.c_diag, dtype=float)
        self.gamma_diag = np.asarray(self.gamma_diag, dtype=float)
        if self.n <= 0:
            raise InputError("n must be positive")
        if self.c_diag.shape != (self.n,) or self.gamma_diag.shape != (self.n,):
            raise InputError("C and gamma must be length-n vectors")
        if np.any(self.c_diag <= 0):
            raise InputError("self-decay rates C must be strictly positive")
        if np.any(self.gamma_diag <= 0):
            raise InputError("activation gains gamma must be strictly positive")
        for name, m in (("A", self.a_mat), ("B", self.b_mat)):
            if m.shape != (self.n, self.n):
                raise InputError(f"{name} must be {self.n} x {self.n}")
        for name, v in (("delta", self.delta), ("d1", self.d1_bound),
                        ("d2", self.d2_bound), ("mu1", self.mu1), ("mu2", self.mu2)):
            if not math.isfinite(v) or v < 0:
                raise InputError(f"{name} must be a nonnegative finite number")
        for name, spec, bound, rate in (("d1", self.delay1, self.d1_bound, self.mu1),
                                        ("d2", self.delay2, self.d2_bound, self.mu2)):
            if spec.bound() > bound + 1e-9:
                raise InputError(f"delay waveform {name} exceeds its declared bound")
            if spec.rate_bound() > rate + 1e-9:
                raise InputError(f"delay waveform {name} exceeds its declared rate bound")
        for v in (self.external_input, self.equilibrium):
            if v is not None and np.asarray(v).shape != (2, self.n):
                raise InputError("vector fields must be pair-form (2, n) arrays")

    @property
    def d_bound(self) -> float:
        return self.d1_bound + self.d2_bound

    @property
    def mu(self) -> float:
        return self.mu1 + self.mu2

    def total_delay(self, t):
        return self.delay1(t) + self.delay2(t)

    def lookback(self) -> float:
        """Largest history depth any evaluation can request."""
        return max(self.delta, self.d1_bound + self.d2_bound, self.d1_bound)

    # ---- JSON ------------------------------------------------------------------

    def to_json(self) -> dict:
        doc = {
            "n": self.n,
            "C": [float(c) for c in self.c_diag],
            "A": qmat_to_json(self.a_mat),
            "B": qmat_to_json(self.b_mat),
            "delta": self.delta,
            "d1": self.d1_bound,
            "d2": self.d2_bound,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "gamma": [float(g) for g in self.gamma_diag],
            "delay_functions": {"d1": self.delay1.to_json(),
                                "d2": self.delay2.to_json()},
        }
        from .qmatrix import qv_components
        if self.external_input is not None:
            doc["external_input"] = [[float(c) for c in row]
                                     for row in qv_components(self.external_input)]
        if self.equilibrium is not None:
            doc["equilibrium"] = [[float(c) for c in row]
                                  for row in qv_components(self.equilibrium)]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "NetworkModel":
        if not isinstance(doc, dict):
            raise InputError("model config must be a JSON object")
        try:
            n = int(doc["n"])
            c_diag = [float(v) for v in doc["C"]]
            a_mat = qmat_from_json(doc["A"])
            b_mat = qmat_from_json(doc["B"])
            delta = float(doc["delta"])
            d1 = float(doc["d1"])
            d2 = float(doc["d2"])
            mu1 = float(doc["mu1"])
            mu2 = float(doc["mu2"])
            gamma = [float(v) for v in doc["gamma"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed model config: {exc}") from None
        funcs = doc.get("delay_functions") or {}
        delay1 = (DelaySpec.from_json(funcs["d1"]) if "d1" in funcs
                  else DelaySpec(kind="constant", value=d1))
        delay2 = (DelaySpec.from_json(funcs["d2"]) if "d2" in funcs
                  else DelaySpec(kind="constant", value=d2))

        def _vec(key):
            if key not in doc or doc[key] is None:
                return None
            arr = np.asarray(doc[key], dtype=float)
            if arr.shape != (n, 4):
                raise InputError(f"{key} must be an n x 4 component list")
            return qv_from_components(arr)

        return cls(n=n, c_diag=np.asarray(c_diag), a_mat=a_mat, b_mat=b_mat,
                   delta=delta, d1_bound=d1, d2_bound=d2, mu1=mu1, mu2=mu2,
                   gamma_diag=np.asarray(gamma), delay1=delay1, delay2=delay2,
                   external_input=_vec("external_input"),
                   equilibrium=_vec("equilibrium"))


def _strip_private(obj):
    """Drop keys starting with '_' so annotations never affect semantics."""
    if isinstance(obj, dict):
        return {k: _strip_private(v) for k, v in sorted(obj.items())
                if not k.startswith("_")}
    if isinstance(obj, list):
        return [_strip_private(v) for v in obj]
    return obj


def config_hash(doc: dict) -> str:
    """Hash of the semantically meaningful config content.

    Whitespace, key order, and '_'-prefixed annotation fields do not affect
    the digest; any value change does.
    """
    canon = json.dumps(_strip_private(doc), sort_keys=True,
                       separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_model(path) -> tuple[NetworkModel, dict]:
    """Read a model config file; returns (model, raw JSON document)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    return NetworkModel.from_json(doc), doc

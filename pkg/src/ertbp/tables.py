"""Harmonic tables of the Melnikov potential and their evaluation.

A HarmonicTable stores the real coefficients L_{q,k} (q >= 0; reality
gives L_{-q,-k} = L_{q,k}) as ScaledReal values.  Reconstruction:

    script-L = L_{0,0} + 2 sum_{k>=1} L_{0,k} cos(k alpha)
             + 2 sum_{q>=1} sum_k L_{q,k} cos(q s + k alpha).

Entries come either from the exact series pipeline (melnikov.L_qk) or
from the 2-D FFT of the direct quadrature on a uniform grid; the two
routes are independent and cross-validate each other.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError, TableRangeError
from .melnikov import L_qk, direct_grid, four_harmonics
from .scaled import ScaledReal

__all__ = [
    "HarmonicTable",
    "series_eval",
    "band_eval",
    "harmonics_from_grid",
    "table_from_four_harmonics",
    "SeriesTableProvider",
    "GridTableProvider",
    "TableStencil",
]


@dataclass
class HarmonicTable:
    """Grid of Fourier coefficients L_{q,k} plus construction metadata."""

    entries: dict
    G: float
    e: float
    l_max: int = 0
    tol: float = 0.0
    source: str = ""
    noise_floor: float = 0.0
    flagged: list = field(default_factory=list)

    def q_values(self):
        return sorted({q for q, _ in self.entries})

    def band(self, q):
        out = {k: v for (qq, k), v in self.entries.items() if qq == q}
        if not out:
            raise TableRangeError(f"table has no q = {q} band")
        return out

    def entry(self, q, k):
        if q < 0:
            q, k = -q, -k
        try:
            return self.entries[(q, k)]
        except KeyError:
            raise TableRangeError(f"no entry ({q}, {k}) in table") from None

    def has_entry(self, q, k):
        if q < 0:
            q, k = -q, -k
        return (q, k) in self.entries

    def scaled_by(self, c):
        """New table with every entry multiplied by c > 0."""
        return HarmonicTable(
            entries={key: v * c for key, v in self.entries.items()},
            G=self.G, e=self.e, l_max=self.l_max, tol=self.tol,
            source=self.source + "+scaled", noise_floor=self.noise_floor)

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return json.dumps({
            "meta": {"G": self.G, "e": self.e, "l_max": self.l_max,
                     "tol": self.tol, "source": self.source,
                     "noise_floor": self.noise_floor},
            "entries": [
                {"q": q, "k": k, "mantissa": v.mantissa,
                 "log_factor": v.log_factor}
                for (q, k), v in sorted(self.entries.items())],
        }, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        meta = doc["meta"]
        entries = {
            (int(it["q"]), int(it["k"])):
                ScaledReal.from_log(it["mantissa"], it["log_factor"])
            for it in doc["entries"]}
        return cls(entries=entries, G=meta["G"], e=meta["e"],
                   l_max=meta.get("l_max", 0), tol=meta.get("tol", 0.0),
                   source=meta.get("source", ""),
                   noise_floor=meta.get("noise_floor", 0.0))


def table_from_four_harmonics(fh):
    """HarmonicTable holding just the four leading harmonics."""
    return HarmonicTable(entries=dict(fh.items()), G=fh.G, e=fh.e,
                         source="four-harmonics")


def band_eval(table, q, alpha, s):
    """(value, d/dalpha, d/ds) of the q-band, all ScaledReal.

    Band 0 is L_{0,0} + 2 sum_{k>=1} L_{0,k} cos k alpha; bands q >= 1
    are 2 sum_k L_{q,k} cos(q s + k alpha).  Keeping bands separate lets
    callers combine mantissas across exponentially different scales.
    """
    entries = table.band(q)
    val = ScaledReal()
    da = ScaledReal()
    ds = ScaledReal()
    for k, L in entries.items():
        if q == 0:
            if k < 0:
                continue
            w = 1.0 if k == 0 else 2.0 * math.cos(k * alpha)
            val = val + L * w
            if k != 0:
                da = da + L * (-2.0 * k * math.sin(k * alpha))
        else:
            ph = q * s + k * alpha
            val = val + L * (2.0 * math.cos(ph))
            da = da + L * (-2.0 * k * math.sin(ph))
            ds = ds + L * (-2.0 * q * math.sin(ph))
    return val, da, ds


def series_eval(table, alpha, s):
    """(value, d/dalpha, d/ds) of the cosine reconstruction, as floats.

    Bands whose scale underflows a double contribute zero; use band_eval
    for scale-separated work at large G.
    """
    val = da = ds = 0.0
    for q in table.q_values():
        v, a, d = band_eval(table, q, alpha, s)
        val += v.to_float()
        da += a.to_float()
        ds += d.to_float()
    return val, da, ds


def harmonics_from_grid(alpha_nodes, s_nodes, G, params, tol=1e-9,
                        sampler=None, q_max=None, k_max=None):
    """Extract L_{q,k} by 2-D FFT of the direct quadrature on a grid.

    Node counts must be powers of two and at least 2*(max index) + 2.
    Entries below the measured quadrature noise floor are zeroed and
    listed in table.flagged.
    """
    for n in (alpha_nodes, s_nodes):
        if n < 4 or (n & (n - 1)) != 0:
            raise DomainError("node counts must be powers of two >= 4")
    e = params.e if hasattr(params, "e") else float(params)
    if q_max is None:
        q_max = s_nodes // 2 - 1
    if k_max is None:
        k_max = alpha_nodes // 2 - 1
    if s_nodes < 2 * q_max + 2 or alpha_nodes < 2 * k_max + 2:
        raise DomainError("node counts must be >= 2*(max index) + 2")

    alphas = 2.0 * math.pi * np.arange(alpha_nodes) / alpha_nodes
    ss = 2.0 * math.pi * np.arange(s_nodes) / s_nodes
    F = np.empty((s_nodes, alpha_nodes))
    if sampler is None:
        grid = direct_grid(G, e, tol)
        for i, s in enumerate(ss):
            r, cosf, sinf = grid.primary(s)
            for j, a in enumerate(alphas):
                F[i, j] = grid.value_from_primary(a, r, cosf, sinf)
    else:
        for i, s in enumerate(ss):
            for j, a in enumerate(alphas):
                F[i, j] = sampler(a, s)

    A = np.fft.fft2(F) / (s_nodes * alpha_nodes)

    # noise floor from the Nyquist shell (nothing physical lives there)
    shell = max(np.max(np.abs(A[s_nodes // 2, :])),
                np.max(np.abs(A[:, alpha_nodes // 2])))
    floor = max(shell, 1e-17 * np.max(np.abs(A)))

    entries = {}
    flagged = []
    for q in range(q_max + 1):
        for k in range(-k_max, k_max + 1):
            if q == 0 and k < 0:
                continue
            c = A[q % s_nodes, k % alpha_nodes]
            if abs(c.imag) > 10.0 * floor + 1e-3 * abs(c.real):
                raise AccuracyError(
                    f"harmonic ({q},{k}) has imaginary part {c.imag:.2e} "
                    "above the noise floor", estimate=c.real,
                    achieved=abs(c.imag))
            if abs(c.real) <= 3.0 * floor:
                flagged.append((q, k))
                continue
            entries[(q, k)] = ScaledReal.from_float(float(c.real))
    if floor > tol:
        raise AccuracyError("grid noise floor exceeds requested tol",
                            achieved=float(floor))
    return HarmonicTable(entries=entries, G=G, e=e, tol=tol, source="grid",
                         noise_floor=float(floor), flagged=flagged)


# ---------------------------------------------------------------------------
# providers and G-differentiation
# ---------------------------------------------------------------------------

def _cache_key(kind, G, e, q_max, k_max, l_max):
    blob = f"{kind}:{G!r}:{e!r}:{q_max}:{k_max}:{l_max}"
    return hashlib.sha1(blob.encode()).hexdigest()[:20]


class SeriesTableProvider:
    """Builds L_{q,k} tables from the exact series pipeline, with caching."""

    def __init__(self, e, q_max=1, k_max=4, l_max=40, spec=None,
                 cache_dir=None):
        self.e = e
        self.q_max = q_max
        self.k_max = k_max
        self.l_max = l_max
        self.spec = spec
        self.cache_dir = cache_dir or os.environ.get("ERTBP_CACHE_DIR")
        self._mem = {}

    def table(self, G):
        key = round(float(G), 12)
        tab = self._mem.get(key)
        if tab is not None:
            return tab
        tab = self._load(key)
        if tab is None:
            entries = {}
            for q in range(self.q_max + 1):
                kmin = 0 if q == 0 else -self.k_max
                for k in range(kmin, self.k_max + 1):
                    entries[(q, k)] = L_qk(q, k, key, self.e,
                                           l_max=self.l_max, spec=self.spec)
            tab = HarmonicTable(entries=entries, G=key, e=self.e,
                                l_max=self.l_max, tol=1e-13, source="series")
            self._store(key, tab)
        if len(self._mem) > 64:
            self._mem.clear()
        self._mem[key] = tab
        return tab

    def _path(self, G):
        if not self.cache_dir:
            return None
        name = _cache_key("series", G, self.e, self.q_max, self.k_max,
                          self.l_max)
        return os.path.join(self.cache_dir, name + ".json")

    def _load(self, G):
        path = self._path(G)
        if path and os.path.exists(path):
            with open(path) as fh:
                return HarmonicTable.from_json(fh.read())
        return None

    def _store(self, G, tab):
        path = self._path(G)
        if path:
            os.makedirs(self.cache_dir, exist_ok=True)
            with open(path, "w") as fh:
                fh.write(tab.to_json())


class GridTableProvider:
    """Builds tables by grid FFT of the direct quadrature (moderate G)."""

    def __init__(self, e, alpha_nodes=64, s_nodes=64, tol=1e-9,
                 q_max=None, k_max=None):
        self.e = e
        self.alpha_nodes = alpha_nodes
        self.s_nodes = s_nodes
        self.tol = tol
        self.q_max = q_max
        self.k_max = k_max
        self._mem = {}

    def table(self, G):
        key = round(float(G), 12)
        tab = self._mem.get(key)
        if tab is None:
            tab = harmonics_from_grid(self.alpha_nodes, self.s_nodes, key,
                                      self.e, tol=self.tol,
                                      q_max=self.q_max, k_max=self.k_max)
            if len(self._mem) > 16:
                self._mem.clear()
            self._mem[key] = tab
        return tab


class FourHarmonicsProvider:
    """Tables from the closed-form leading model (fast, large G)."""

    def __init__(self, e):
        self.e = e
        self._mem = {}

    def table(self, G):
        key = round(float(G), 12)
        tab = self._mem.get(key)
        if tab is None:
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                tab = table_from_four_harmonics(four_harmonics(key, self.e))
            self._mem[key] = tab
        return tab


class TableStencil:
    """Tables at G0 (1 -/+ h) for G-derivatives and local interpolation.

    Entries depend on G both through their mantissa path and through the
    explicit factor e^{-q G^3/3}; the latter is differentiated
    analytically (d log_factor / dG = -q G^2), the mantissa path by the
    three-point Lagrange rule, which avoids the catastrophic cancellation
    a naive difference of full entries would suffer at large G.
    """

    def __init__(self, provider, G0, rel_step=1e-4, trust=0.05):
        self.provider = provider
        self.G0 = float(G0)
        self.h = rel_step * self.G0
        self.trust = trust * self.G0
        self.Gs = (self.G0 - self.h, self.G0, self.G0 + self.h)
        self.tabs = tuple(provider.table(g) for g in self.Gs)
        self.keys = sorted(self.tabs[1].entries)
        # mantissa paths m(G) = L(G) e^{+q G^3/3}, safely float-sized
        self._m = {}
        for key in self.keys:
            q = key[0]
            path = []
            for g, tab in zip(self.Gs, self.tabs):
                L = tab.entries.get(key, ScaledReal())
                path.append((L * ScaledReal.exp(q * g ** 3 / 3.0)).to_float())
            self._m[key] = tuple(path)

    def _check(self, G):
        if abs(G - self.G0) > self.trust:
            raise TableRangeError(
                f"G = {G} outside stencil trust radius around {self.G0}")

    def _lagrange(self, path, G):
        g0, g1, g2 = self.Gs
        l0 = (G - g1) * (G - g2) / ((g0 - g1) * (g0 - g2))
        l1 = (G - g0) * (G - g2) / ((g1 - g0) * (g1 - g2))
        l2 = (G - g0) * (G - g1) / ((g2 - g0) * (g2 - g1))
        return path[0] * l0 + path[1] * l1 + path[2] * l2

    def _lagrange_d(self, path, G):
        g0, g1, g2 = self.Gs
        d0 = ((G - g1) + (G - g2)) / ((g0 - g1) * (g0 - g2))
        d1 = ((G - g0) + (G - g2)) / ((g1 - g0) * (g1 - g2))
        d2 = ((G - g0) + (G - g1)) / ((g2 - g0) * (g2 - g1))
        return path[0] * d0 + path[1] * d1 + path[2] * d2

    def table_at(self, G):
        """Interpolated HarmonicTable at G (within the trust radius)."""
        self._check(G)
        entries = {}
        for key in self.keys:
            q = key[0]
            m = self._lagrange(self._m[key], G)
            entries[key] = ScaledReal.from_log(m, -q * G ** 3 / 3.0)
        base = self.tabs[1]
        return HarmonicTable(entries=entries, G=G, e=base.e,
                             l_max=base.l_max, tol=base.tol,
                             source=base.source + "+stencil")

    def dG_table_at(self, G):
        """Table whose entries are dL_{q,k}/dG at G."""
        self._check(G)
        entries = {}
        for key in self.keys:
            q = key[0]
            m = self._lagrange(self._m[key], G)
            mp = self._lagrange_d(self._m[key], G)
            entries[key] = ScaledReal.from_log(mp - q * G * G * m,
                                               -q * G ** 3 / 3.0)
        base = self.tabs[1]
        return HarmonicTable(entries=entries, G=G, e=base.e,
                             l_max=base.l_max, tol=base.tol,
                             source=base.source + "+dG")

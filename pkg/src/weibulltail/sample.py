"""Validated, sorted samples and order-statistic access."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BadK, EmptySample, InvalidValue, NonPositiveTail


class SortedSample:
    """Immutable ascending sample ``X_{1,n} <= ... <= X_{n,n}``.

    Build instances with :func:`ingest`; the constructor trusts its input.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        values.setflags(write=False)
        self._values = values

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.size

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"SortedSample(n={self.n})"

    def __eq__(self, other):
        if not isinstance(other, SortedSample):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def order_stat(self, j: int) -> float:
        """Return ``X_{j,n}`` (1-based, ascending)."""
        if not 1 <= j <= self.n:
            raise IndexError(j)
        return float(self._values[j - 1])

    def top(self, i: int) -> float:
        """Return ``X_{n-i+1,n}``, the i-th largest observation."""
        return self.order_stat(self.n - i + 1)

    @cached_property
    def _log_desc(self) -> np.ndarray:
        # log of the values in descending order; nan where the value is <= 0
        desc = self._values[::-1]
        out = np.full(desc.shape, np.nan)
        pos = desc > 0
        out[pos] = np.log(desc[pos])
        out.setflags(write=False)
        return out

    def top_logs(self, k: int) -> np.ndarray:
        """``log X_{n-i+1,n}`` for ``i = 1..k`` (descending order).

        Raises NonPositiveTail if one of the top ``k`` values is ``<= 0``.
        """
        check_k(self.n, k, k_max=self.n)
        if not self._values[self.n - k] > 0:
            raise NonPositiveTail(
                f"X_(n-k+1,n) = {self._values[self.n - k]!r} is not positive (n={self.n}, k={k})"
            )
        return self._log_desc[:k]


def ingest(raw) -> SortedSample:
    """Validate raw observations and return them sorted ascending.

    Raises EmptySample on empty input and InvalidValue on the first
    non-finite entry.
    """
    arr = np.asarray(raw, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptySample("sample is empty")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        i = int(bad[0])
        raise InvalidValue(i, float(arr[i]))
    return SortedSample(np.sort(arr, kind="stable"))


def read_sample(path) -> SortedSample:
    """Read one value per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            # first CSV column only, '.' decimal point regardless of locale
            field = text.split(",")[0].strip()
            try:
                values.append(float(field))
            except ValueError:
                raise InvalidValue(lineno, field) from None
    return ingest(values)


def check_k(n: int, k: int, k_min: int = 2, k_max: int | None = None):
    if k_max is None:
        k_max = n
    if not isinstance(k, (int, np.integer)) or not k_min <= k <= k_max:
        raise BadK(f"k={k!r} outside [{k_min}, {k_max}] for n={n}")


def top_log_spacings(s: SortedSample, k: int) -> np.ndarray:
    """Return ``log X_{n-i+1,n} - log X_{n-k+1,n}`` for ``i = 1..k-1``."""
    logs = s.top_logs(k)
    return logs[:-1] - logs[-1]


@dataclass(frozen=True)
class IntermediateCheck:
    n: int
    k: int
    ratio: float
    ok: bool
    message: str

    def as_dict(self):
        return {"n": self.n, "k": self.k, "ratio": self.ratio, "ok": self.ok, "message": self.message}


def check_intermediate(n: int, k: int) -> IntermediateCheck:
    """Advisory look at a single ``(n, k)`` pair.

    ``k -> inf`` and ``k/n -> 0`` are statements about a sequence; one pair
    cannot confirm them. This only reports ``k/n`` and flags ``k = n``.
    """
    ratio = k / n
    if k >= n:
        return IntermediateCheck(n, k, ratio, False, "warning: k = n, no order statistic left below the threshold")
    return IntermediateCheck(n, k, ratio, True, "ok")

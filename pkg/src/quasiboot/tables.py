"""Result containers and their CSV / JSON serialization."""
import csv
from dataclasses import asdict, dataclass, field
import json
from math import sqrt
from pathlib import Path

import numpy as np

__all__ = [
    "COVERAGE_COLUMNS",
    "CoverageRow",
    "CoverageTable",
    "CdfDataset",
    "emit",
    "read_coverage_csv",
]

COVERAGE_COLUMNS = ("kind", "n", "p", "x_dist", "scheme", "level", "frequency", "mc_se", "R", "B", "seed")


def mc_standard_error(freq, R):
    return sqrt(freq * (1.0 - freq) / R) if R > 0 else float("nan")


@dataclass(frozen=True)
class CoverageRow:
    kind: str
    n: int
    p: int
    x_dist: str
    scheme: str
    level: float
    frequency: float
    mc_se: float
    R: int
    B: int
    seed: object


@dataclass
class CoverageTable:
    rows: list = field(default_factory=list)

    @classmethod
    def from_hits(cls, kind, n, p, x_dist, scheme, alphas, hits, R, B, seed):
        """Rows for one configuration from per-level hit counts."""
        rows = []
        for a, h in zip(alphas, hits):
            f = float(h) / R
            rows.append(
                CoverageRow(kind, int(n), int(p), str(x_dist), str(scheme), 1.0 - float(a), f, mc_standard_error(f, R), int(R), int(B), seed)
            )
        return cls(rows)

    def frequencies(self):
        return np.array([r.frequency for r in self.rows])

    def levels(self):
        return np.array([r.level for r in self.rows])

    def lookup(self, level, **match):
        """Frequency of the single row at ``level`` (within 1e-9) matching ``match``."""
        hits = [
            r
            for r in self.rows
            if abs(r.level - level) < 1e-9 and all(getattr(r, k) == v for k, v in match.items())
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match level={level} {match}")
        return hits[0].frequency

    def extend(self, other):
        self.rows.extend(other.rows)
        return self

    def as_records(self):
        return [asdict(r) for r in self.rows]

    def __len__(self):
        return len(self.rows)


@dataclass
class CdfDataset:
    """Sorted realizations of the sum statistic and its quasi-Gaussian counterpart.

    For ``p = 1`` the statistic is ``S_n`` itself and the reference is the
    normal c.d.f.; for ``p > 1`` it is ``||S_n||**2`` against chi-squared with
    ``p`` degrees of freedom.
    """

    value_sn: np.ndarray
    value_syn: np.ndarray
    reference: str
    ks_sn_syn: float
    ks_sn_ref: float
    ks_syn_ref: float
    meta: dict = field(default_factory=dict)

    def summary(self):
        out = {
            "reference": self.reference,
            "N": int(self.value_sn.size),
            "ks_sn_syn": self.ks_sn_syn,
            "ks_sn_ref": self.ks_sn_ref,
            "ks_syn_ref": self.ks_syn_ref,
        }
        out.update(self.meta)
        return out


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def emit(obj, fmt, path):
    """Write a :class:`CoverageTable`, :class:`CdfDataset` or plain dict.

    Coverage tables become CSV with :data:`COVERAGE_COLUMNS` or a JSON list of
    rows. A c.d.f. dataset becomes the paired sorted columns
    ``value_sn,value_syn`` plus a ``<path>.json`` sidecar with the KS summaries
    (CSV), or a single JSON document. Dicts and lists are written as JSON.
    """
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(obj, CoverageTable):
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(COVERAGE_COLUMNS)
                for r in obj.rows:
                    w.writerow([getattr(r, c) if not isinstance(getattr(r, c), float) else repr(getattr(r, c)) for c in COVERAGE_COLUMNS])
        else:
            path.write_text(json.dumps(obj.as_records(), indent=2, default=_json_default))
    elif isinstance(obj, CdfDataset):
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("value_sn", "value_syn"))
                for a, b in zip(obj.value_sn, obj.value_syn):
                    w.writerow((repr(float(a)), repr(float(b))))
            sidecar = path.with_name(path.name + ".json")
            sidecar.write_text(json.dumps(obj.summary(), indent=2, default=_json_default))
        else:
            doc = dict(obj.summary(), value_sn=obj.value_sn, value_syn=obj.value_syn)
            path.write_text(json.dumps(doc, indent=2, default=_json_default))
    else:
        if fmt == "csv":
            records = obj if isinstance(obj, list) else [obj]
            keys = list(records[0]) if records else []
            with path.open("w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=keys)
                w.writeheader()
                w.writerows(records)
        else:
            path.write_text(json.dumps(obj, indent=2, default=_json_default))


def _parse_seed(text):
    if text in ("", "None"):
        return None
    try:
        return int(text)
    except ValueError:
        return text


def read_coverage_csv(path):
    """Inverse of ``emit(table, "csv", path)``."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COVERAGE_COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            rows.append(
                CoverageRow(
                    rec["kind"],
                    int(rec["n"]),
                    int(rec["p"]),
                    rec["x_dist"],
                    rec["scheme"],
                    float(rec["level"]),
                    float(rec["frequency"]),
                    float(rec["mc_se"]),
                    int(rec["R"]),
                    int(rec["B"]),
                    _parse_seed(rec["seed"]),
                )
            )
    return CoverageTable(rows)

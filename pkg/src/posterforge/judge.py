"""Rubric-driven poster scoring and table-style aggregation."""

import json
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Optional

from . import prompts
from .errors import AggregationError, SchemaError, ValidationError

log = logging.getLogger(__name__)

CONTENT, DESIGN = "Poster Content", "Poster Design"
SCALE = (1, 2, 3, 4, 5)
JUDGE_RETRY_BUDGET = 1


@dataclass(frozen=True)
class Anchor:
    level: int
    label: str
    kind: str  # positive | negative
    descriptor: str
    examples: tuple


@dataclass(frozen=True)
class Dimension:
    domain: str
    focus_area: str
    metric: str
    descriptor: str
    anchors: tuple


@dataclass
class Rubric:
    dimensions: list
    canonical: bool = False

    def __post_init__(self):
        counts = {CONTENT: 0, DESIGN: 0}
        for d in self.dimensions:
            if d.domain not in counts:
                raise ValueError(f"unknown domain {d.domain!r}")
            counts[d.domain] += 1
            if [a.level for a in d.anchors] != list(SCALE):
                raise ValueError(f"{d.metric}: anchors must cover levels 1-5 in order")
            for a in d.anchors:
                want = "positive" if a.level >= 4 else "negative"
                if a.kind != want:
                    raise ValueError(f"{d.metric}: level {a.level} examples must be {want}")
        if counts != {CONTENT: 6, DESIGN: 10}:
            raise ValueError(f"rubric needs 6 content + 10 design dimensions, got {counts}")
        names = [d.metric for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate metric names in rubric")

    def dimension(self, metric: str) -> Dimension:
        for d in self.dimensions:
            if d.metric == metric:
                return d
        raise LookupError(f"no rubric dimension named {metric!r}")

    def metrics(self, domain: Optional[str] = None) -> list:
        return [d.metric for d in self.dimensions if domain is None or d.domain == domain]


def load_rubric(path=None) -> Rubric:
    if path is None:
        raw = resources.files("posterforge.data").joinpath("rubric.json").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    dims = [
        Dimension(d["domain"], d["focus_area"], d["metric"], d["descriptor"],
                  tuple(Anchor(a["level"], a["label"], a["kind"], a["descriptor"], tuple(a["examples"]))
                        for a in d["anchors"]))
        for d in data["dimensions"]
    ]
    return Rubric(dims, bool(data.get("canonical", False)))


def check_score(score) -> int:
    if isinstance(score, bool) or not isinstance(score, int) or score not in SCALE:
        raise ValidationError(f"score {score!r} is outside the 1-5 scale", [f"score {score!r}"])
    return score


@dataclass(frozen=True)
class DimensionScore:
    metric: str
    explanation: str
    score: Optional[int]  # None when the judge never produced a valid score

    def __post_init__(self):
        if self.score is not None:
            check_score(self.score)


def _messages(dim: Dimension, image: bytes = b"") -> list:
    anchors = [(a.level, a.label, a.kind, a.descriptor, "; ".join(a.examples)) for a in dim.anchors]
    return prompts.judge(dim.focus_area, dim.metric, dim.descriptor, anchors, image)


def build_eval_prompt(metric, rubric: Rubric = None) -> str:
    rubric = rubric or load_rubric()
    dim = metric if isinstance(metric, Dimension) else rubric.dimension(metric)
    return "\n\n".join(m.text for m in _messages(dim))


def evaluate_poster(image: bytes, rubric: Rubric, gw, retry_budget: int = JUDGE_RETRY_BUDGET) -> list:
    """one call per dimension; a dimension that never validates is recorded as null"""
    out = []
    for dim in rubric.dimensions:
        req = gw.request("judge", _messages(dim, image), "json:judge_score")

        def check(value, metric=dim.metric):
            got = value[0].get("metric")
            return [] if got in (None, metric) else [f"metric {got!r} does not match {metric!r}"]

        try:
            value = gw.complete_json(req, "judge_score", check=check, retry_budget=retry_budget,
                                     error_cls=ValidationError)
        except (SchemaError, ValidationError) as e:
            log.warning("judge: %s failed: %s", dim.metric, e)
            out.append(DimensionScore(dim.metric, str(e), None))
            continue
        item = value[0]
        out.append(DimensionScore(dim.metric, item.get("explanation", ""), item["score"]))
    return out


# -- aggregation ----------------------------------------------------------

def round2(x) -> Decimal:
    """half-up rounding to 2 decimals on the exact decimal value"""
    d = x if isinstance(x, Decimal) else Decimal(str(x))
    return d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def _mean(values) -> Decimal:
    values = [v if isinstance(v, Decimal) else Decimal(str(v)) for v in values]
    return sum(values, Decimal(0)) / Decimal(len(values))


def domain_average(means) -> Decimal:
    """mean of per-dimension means, half-up to 2 decimals"""
    if not means:
        raise AggregationError("no dimension means to average")
    return round2(_mean(means))


@dataclass
class ModelRow:
    judge_model: str
    n_posters: int
    means: dict  # metric -> Decimal or None
    null_counts: dict
    averages: dict  # domain -> Decimal or None

    def to_dict(self):
        num = lambda v: None if v is None else float(v)  # noqa: E731
        return {
            "judge_model": self.judge_model,
            "n_posters": self.n_posters,
            "dimensions": {m: num(v) for m, v in self.means.items()},
            "null_counts": dict(self.null_counts),
            "averages": {d: num(v) for d, v in self.averages.items()},
        }


@dataclass
class EvaluationReport:
    rows: list
    scores: list = field(default_factory=list)  # (poster, model, metric, score, explanation)
    rubric_canonical: bool = False

    def row(self, judge_model: str) -> ModelRow:
        for r in self.rows:
            if r.judge_model == judge_model:
                return r
        raise KeyError(judge_model)

    def to_dict(self):
        return {
            "rubric_canonical": self.rubric_canonical,
            "rows": [r.to_dict() for r in self.rows],
            "scores": [{"poster": p, "judge_model": m, "metric": k, "score": s, "explanation": e}
                       for p, m, k, s, e in self.scores],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def aggregate(results, rubric: Rubric = None) -> EvaluationReport:
    """results: iterable of (poster_id, judge_model, [DimensionScore]) triples"""
    rubric = rubric or load_rubric()
    by_model, flat = {}, []
    for poster, model, scores in results:
        metrics = [s.metric for s in scores]
        if sorted(metrics) != sorted(rubric.metrics()) or len(set(metrics)) != len(metrics):
            raise AggregationError(f"poster {poster} ({model}): dimension set does not match the rubric")
        for s in scores:
            if s.score is not None:
                check_score(s.score)
            flat.append((poster, model, s.metric, s.score, s.explanation))
        by_model.setdefault(model, {})
        if poster in by_model[model]:
            raise AggregationError(f"poster {poster} scored twice by {model}")
        by_model[model][poster] = {s.metric: s.score for s in scores}
    rows = []
    for model in sorted(by_model):
        posters = by_model[model]
        means, nulls = {}, {}
        for metric in rubric.metrics():
            vals = [p[metric] for p in posters.values() if p[metric] is not None]
            nulls[metric] = len(posters) - len(vals)
            means[metric] = round2(_mean(vals)) if vals else None
        averages = {}
        for domain in (CONTENT, DESIGN):
            ms = [means[m] for m in rubric.metrics(domain) if means[m] is not None]
            averages[domain] = domain_average(ms) if ms else None
        rows.append(ModelRow(model, len(posters), means, nulls, averages))
    return EvaluationReport(rows, sorted(flat, key=lambda t: (t[1], t[0], t[2])), rubric.canonical)

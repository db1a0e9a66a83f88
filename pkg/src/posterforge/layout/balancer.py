"""Column balancing loop: ask the balancer agent for edits, re-measure, repeat."""

import logging
from collections import Counter
from dataclasses import dataclass, field

from .. import prompts
from ..curator import COLUMNS, ContentConstraints, Storyboard, validate_storyboard
from ..errors import BalancingError
from .engine import OVERFLOW, Layouter, UtilizationReport

log = logging.getLogger(__name__)


@dataclass
class BalanceTrace:
    iterations: list = field(default_factory=list)  # (strategies, fractions) per balancer call
    accepted: int = 0  # index into candidates; 0 = the unbalanced input
    invoked: bool = False

    def to_dict(self):
        return {
            "invoked": self.invoked,
            "accepted_iteration": self.accepted,
            "iterations": [{"strategies": s, "fractions": [round(f, 4) for f in fr]}
                           for s, fr in self.iterations],
        }


def in_target(report: UtilizationReport, band) -> bool:
    return all(band[0] <= u.fraction <= band[1] for u in report.columns.values())


def choose_strategies(report: UtilizationReport, target_band=(0.85, 0.95),
                      status_band=(0.80, 1.00)) -> dict:
    """per column: None inside the target band, A for light edits, B for section changes"""
    out = {}
    for col, u in report.columns.items():
        if target_band[0] <= u.fraction <= target_band[1]:
            out[col] = None
        elif status_band[0] <= u.fraction <= status_band[1]:
            out[col] = "A"
        else:
            out[col] = "B"
    return out


def revision_violations(before: Storyboard, after: Storyboard, strategies: dict) -> list:
    """edits the balancer is never allowed to make"""
    out = []
    old = {s.section_id: s for s in before.sections}
    new = {s.section_id: s for s in after.sections}
    for sid, s in old.items():
        if sid not in new:
            if strategies.get(s.column) != "B":
                out.append(f"section {sid} removed from {s.column} column without strategy B")
            if s.importance_level == 1:
                out.append(f"importance-1 section {sid} must never be removed")
            elif s.importance_level == 2:
                keep3 = [o for o in old.values() if o.column == s.column and o.importance_level == 3
                         and o.section_id in new]
                if keep3:
                    out.append(f"section {sid} (importance 2) removed while importance-3 section "
                               f"{keep3[0].section_id} remains")
            continue
        t = new[sid]
        if t.column != s.column:
            out.append(f"section {sid} moved from {s.column} to {t.column} column")
        if t.section_title != s.section_title:
            out.append(f"section {sid} title changed")
        if t.visual_ids != s.visual_ids:
            out.append(f"section {sid} visual assets changed")
        if t.importance_level != s.importance_level:
            out.append(f"section {sid} importance changed")
    for sid, t in new.items():
        if sid not in old and strategies.get(t.column) != "B":
            out.append(f"section {sid} added to {t.column} column without strategy B")
    level1_before = Counter(s.section_id for s in before.sections if s.importance_level == 1)
    level1_after = Counter(s.section_id for s in after.sections if s.importance_level == 1)
    if level1_before != level1_after:
        out.append("set of importance-1 sections changed")
    return out


def _rank(report: UtilizationReport, target_band) -> tuple:
    fr = report.fractions()
    return (sum(f >= 0.80 for f in fr), sum(target_band[0] <= f <= target_band[1] for f in fr))


def balance_columns(storyboard: Storyboard, report: UtilizationReport, structured_sections, gw,
                    layouter: Layouter, classification=None, heights=(),
                    constraints: ContentConstraints = ContentConstraints()):
    """returns (storyboard, report, trace)"""
    cfg = layouter.cfg
    trace = BalanceTrace()
    if in_target(report, cfg.target_band):
        return storyboard, report, trace
    trace.invoked = True
    candidates = [(storyboard, report)]
    current, current_report = storyboard, report
    structured = [s.to_dict() for s in structured_sections]
    for _ in range(cfg.max_iterations):
        strategies = choose_strategies(current_report, cfg.target_band, cfg.status_band)
        shown = {c: (s or "none") for c, s in strategies.items()}
        messages = prompts.balancer(current.dumps(), current_report.columns, shown,
                                    cfg.available_height, structured)
        req = gw.request("balancer", messages, "json:storyboard")
        before = current

        def check(value, before=before, strategies=strategies):
            revised = Storyboard.from_json(value, before.key_visual)
            problems = revision_violations(before, revised, strategies)
            problems += validate_storyboard(revised, classification, heights, constraints)
            unknown = [v for s in revised.sections for v in s.visual_ids if v not in layouter.assets]
            problems += [f"unknown visual {v}" for v in unknown if f"unknown visual {v}" not in problems]
            return problems

        value = gw.complete_json(req, "storyboard", check=check, error_cls=BalancingError)
        current = Storyboard.from_json(value, before.key_visual)
        current_report = layouter.utilization(current)
        trace.iterations.append(({c: s for c, s in strategies.items() if s}, current_report.fractions()))
        candidates.append((current, current_report))
        log.info("balancer iteration %d: %s", len(trace.iterations),
                 ", ".join(f"{f:.3f}" for f in current_report.fractions()))
        if in_target(current_report, cfg.target_band):
            break
    viable = [(i, c) for i, c in enumerate(candidates)
              if not any(u.status == OVERFLOW for u in c[1].columns.values())]
    if not viable:
        fr = ", ".join(f"{f:.1%}" for f in current_report.fractions())
        raise BalancingError(f"overflow remains after {cfg.max_iterations} balancer iterations ({fr})",
                             [f"{c} column {u.fraction:.1%}" for c, u in current_report.columns.items()
                              if u.status == OVERFLOW])
    best_rank = max(_rank(c[1], cfg.target_band) for _, c in viable)
    index, (board, rep) = next((i, c) for i, c in viable if _rank(c[1], cfg.target_band) == best_rank)
    trace.accepted = index
    return board, rep, trace

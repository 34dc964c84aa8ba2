"""Dataset adapters: turn raw match/vote logs into a canonical event stream.

Four input formats are understood:

``generic``
    ``competition,round,winner,loser`` -- one victory per row.
``survivor``
    survivoR ``vote_history.csv`` (voter -> target per tribal council vote)
    and ``castaways.csv`` (season outcome) for ground truth.
``chess``
    pairings/results export with ``round,white,black,result`` columns and a
    ``player,rating`` ground-truth file.
``dota``
    Kaggle ``main_metadata.csv`` (``radiant_team_id, dire_team_id,
    radiant_win`` plus ``week`` or ``start_time``) and a ``team_id,rating``
    ground-truth file.

Extra columns are ignored everywhere. See the README for accepted aliases.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

logger = logging.getLogger(__name__)

FORMATS = ("generic", "survivor", "chess", "dota")

Source = Union[bytes, str, Path, IO[bytes]]


class ParseError(ValueError):
    """Malformed input; ``line`` is the 1-based physical line in the file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class MatchEvent:
    """One directed victory (or vote) ``winner -> loser`` in a round."""

    competition_id: str
    round: int
    winner: str
    loser: str

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"self-loop event for actor {self.winner!r}")
        if self.round < 1:
            raise ValueError(f"round must be >= 1, got {self.round}")


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str


@dataclass(frozen=True)
class GroundTruthTable:
    """Actor scores where a higher score means a better true rank."""

    entries: tuple[tuple[str, float], ...]
    tie_policy: str = "average-rank"

    def __post_init__(self):
        seen = set()
        for actor, score in self.entries:
            if actor in seen:
                raise ValueError(f"duplicate actor {actor!r} in ground truth")
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for actor {actor!r}")
            seen.add(actor)

    @property
    def actors(self) -> list[str]:
        return [a for a, _ in self.entries]

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def __len__(self):
        return len(self.entries)


def normalize_actor_id(raw: str) -> str:
    """Trim whitespace and a float-style trailing ``.0`` (``"8629005.0"`` -> ``"8629005"``)."""
    s = raw.strip()
    if s.endswith(".0") and s[:-2].lstrip("-").isdigit():
        s = s[:-2]
    return s


def _open_text(source: Source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
        if isinstance(data, str):
            return io.StringIO(data, newline="")
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    return io.StringIO(text, newline="")


def _rows(source: Source) -> tuple[list[str], Iterator[tuple[int, dict[str, str]]]]:
    reader = csv.DictReader(_open_text(source))
    if reader.fieldnames is None:
        raise ParseError("missing header row", line=1)
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header

    def gen():
        for row in reader:
            if None in row:
                raise ParseError("too many fields", line=reader.line_num)
            if any(v is None for v in row.values()):
                raise ParseError("too few fields", line=reader.line_num)
            if not any(v.strip() for v in row.values()):
                continue
            yield reader.line_num, {k: v.strip() for k, v in row.items()}

    return header, gen()


def _pick(header: list[str], candidates: Iterable[str], what: str, required=True) -> str | None:
    lower = {h.lower(): h for h in header}
    for c in candidates:
        if c.lower() in lower:
            return lower[c.lower()]
    if required:
        raise ParseError(f"no column for {what}; expected one of {list(candidates)}", line=1)
    return None


def _parse_round(value: str, line: int) -> int:
    try:
        as_float = float(value)
    except ValueError:
        raise ParseError(f"round {value!r} is not a positive integer", line=line) from None
    if not as_float.is_integer() or as_float < 1:
        raise ParseError(f"round {value!r} is not a positive integer", line=line)
    return int(as_float)


def natural_key(s: str):
    return tuple(
        (0, int(tok), "") if tok.isdigit() else (1, 0, tok)
        for tok in re.findall(r"\d+|\D+", s)
    )


def _finish(events: list[tuple[int, MatchEvent]]) -> list[MatchEvent]:
    # stable on input order within (competition, round)
    events.sort(key=lambda p: (natural_key(p[1].competition_id), p[1].round, p[0]))
    return [e for _, e in events]


def _emit(out, rejects, line, competition, rnd, winner, loser):
    winner, loser = normalize_actor_id(winner), normalize_actor_id(loser)
    if not winner or not loser:
        raise ParseError("empty actor id", line=line)
    if winner == loser:
        reason = f"winner == loser ({winner!r})"
        logger.warning("line %d rejected: %s", line, reason)
        if rejects is not None:
            rejects.append(RejectedRow(line, reason))
        return
    out.append((len(out), MatchEvent(competition, rnd, winner, loser)))


def _parse_generic(source, rejects):
    header, rows = _rows(source)
    c_col = _pick(header, ["competition", "competition_id"], "competition")
    r_col = _pick(header, ["round"], "round")
    w_col = _pick(header, ["winner"], "winner")
    l_col = _pick(header, ["loser"], "loser")
    out = []
    for line, row in rows:
        comp = row[c_col]
        if not comp:
            raise ParseError("empty competition id", line=line)
        _emit(out, rejects, line, comp, _parse_round(row[r_col], line), row[w_col], row[l_col])
    return out


def _parse_survivor(source, rejects):
    header, rows = _rows(source)
    c_col = _pick(header, ["version_season", "season"], "season")
    r_col = _pick(header, ["episode", "round"], "episode")
    w_col = _pick(header, ["castaway_id", "castaway"], "voter")
    l_col = _pick(header, ["vote_id", "vote"], "vote target")
    out = []
    for line, row in rows:
        target = row[l_col]
        if not target or target.upper() in ("NA", "NONE"):
            continue  # no vote cast (immunity, absent, etc.)
        season = row[c_col]
        if not season:
            raise ParseError("empty season", line=line)
        rnd = _parse_round(row[r_col], line)
        _emit(out, rejects, line, season, rnd,
              survivor_actor_id(season, row[w_col]), survivor_actor_id(season, target))
    return out


def survivor_actor_id(season: str, castaway: str) -> str:
    """Survivor actors are keyed per season, so returning players are distinct nodes."""
    return f"{season}:{normalize_actor_id(castaway)}"


_DRAW = {"1/2-1/2", "½-½", "0.5-0.5", "draw", "=", "1/2"}
_WHITE = {"1-0", "white", "1"}
_BLACK = {"0-1", "black", "0"}


def _parse_chess(source, rejects):
    header, rows = _rows(source)
    c_col = _pick(header, ["tournament", "event", "competition"], "tournament", required=False)
    r_col = _pick(header, ["round"], "round")
    w_col = _pick(header, ["white", "white_username", "white_player"], "white player")
    b_col = _pick(header, ["black", "black_username", "black_player"], "black player")
    res_col = _pick(header, ["result"], "result")
    out = []
    for line, row in rows:
        comp = row[c_col] if c_col and row[c_col] else "chess"
        rnd = _parse_round(row[r_col], line)
        result = row[res_col].replace(" ", "").lower()
        if result in _DRAW:
            continue
        if result in _WHITE:
            _emit(out, rejects, line, comp, rnd, row[w_col], row[b_col])
        elif result in _BLACK:
            _emit(out, rejects, line, comp, rnd, row[b_col], row[w_col])
        else:
            raise ParseError(f"unrecognised result {row[res_col]!r}", line=line)
    return out


_TRUE = {"true", "1", "t", "yes", "radiant"}
_FALSE = {"false", "0", "f", "no", "dire"}


def _week_of(value: str, line: int) -> int:
    """Encode a timestamp as ``YYYYWW`` (ISO year and week)."""
    try:
        ts = float(value)
        dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    except ValueError:
        try:
            dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError:
            raise ParseError(f"unparsable start_time {value!r}", line=line) from None
    year, week, _ = dt.isocalendar()
    return year * 100 + week


def _parse_dota(source, rejects):
    header, rows = _rows(source)
    wk_col = _pick(header, ["week", "round"], "week", required=False)
    ts_col = _pick(header, ["start_time", "start_date_time"], "start time", required=wk_col is None)
    rad_col = _pick(header, ["radiant_team_id", "radiant_team"], "radiant team")
    dire_col = _pick(header, ["dire_team_id", "dire_team"], "dire team")
    win_col = _pick(header, ["radiant_win"], "radiant_win")
    out = []
    for line, row in rows:
        radiant, dire = row[rad_col], row[dire_col]
        if not radiant or not dire:
            reason = "missing team id"
            logger.warning("line %d rejected: %s", line, reason)
            if rejects is not None:
                rejects.append(RejectedRow(line, reason))
            continue
        rnd = _parse_round(row[wk_col], line) if wk_col else _week_of(row[ts_col], line)
        flag = row[win_col].lower()
        if flag in _TRUE:
            winner, loser = radiant, dire
        elif flag in _FALSE:
            winner, loser = dire, radiant
        else:
            raise ParseError(f"radiant_win {row[win_col]!r} is not boolean", line=line)
        # all leagues form one competition network
        _emit(out, rejects, line, "dota", rnd, winner, loser)
    return out


_PARSERS = {
    "generic": _parse_generic,
    "survivor": _parse_survivor,
    "chess": _parse_chess,
    "dota": _parse_dota,
}


def parse_match_log(source: Source, format: str = "generic", *,
                    rejects: list[RejectedRow] | None = None) -> list[MatchEvent]:
    """Parse a match log into events sorted by (competition, round, input order).

    Rows where winner equals loser are rejected: logged, appended to
    ``rejects`` when given, and otherwise skipped. Any other malformed row
    raises :class:`ParseError` carrying the line number.
    """
    try:
        parser = _PARSERS[format]
    except KeyError:
        raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}") from None
    return _finish(parser(source, rejects))


def write_match_log(events: Iterable[MatchEvent]) -> bytes:
    """Serialize events to the generic CSV format."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["competition", "round", "winner", "loser"])
    for e in events:
        w.writerow([e.competition_id, e.round, e.winner, e.loser])
    return buf.getvalue().encode("utf-8")


# ---------------------------------------------------------------- ground truth

_ORDINAL = re.compile(r"(\d+)(?:st|nd|rd|th)\b", re.IGNORECASE)


def survivor_outcome_score(result: str, season_size: int) -> float | None:
    """Map a castaway's season outcome to an ordinal score (higher is better).

    ``"Sole Survivor"`` scores ``season_size``; ``"Runner-up"`` scores
    ``season_size - 1`` (``"2nd runner-up"`` -> ``season_size - 2``);
    ``"Nth voted out"`` / ``"Nth boot"`` scores ``N``. Returns None when the
    text carries no placement.
    """
    text = result.strip().lower()
    if "sole survivor" in text or text == "winner":
        return float(season_size)
    m = _ORDINAL.search(text)
    if "runner-up" in text or "runner up" in text:
        k = int(m.group(1)) if m else 1
        return float(season_size - k)
    if m:
        return float(m.group(1))
    return None


def _parse_score(value: str, line: int) -> float:
    try:
        score = float(value)
    except ValueError:
        raise ParseError(f"unparsable score {value!r}", line=line) from None
    if not math.isfinite(score):
        raise ParseError(f"non-finite score {value!r}", line=line)
    return score


def _check_unique(pairs, lines):
    seen = {}
    for (actor, _), line in zip(pairs, lines):
        if actor in seen:
            raise ParseError(f"actor {actor!r} duplicated (first on line {seen[actor]})", line=line)
        seen[actor] = line


def _truth_rating(source, actor_cols, score_cols):
    header, rows = _rows(source)
    a_col = _pick(header, actor_cols, "actor")
    s_col = _pick(header, score_cols, "score")
    pairs, lines = [], []
    for line, row in rows:
        actor = normalize_actor_id(row[a_col])
        if not actor:
            raise ParseError("empty actor id", line=line)
        pairs.append((actor, _parse_score(row[s_col], line)))
        lines.append(line)
    _check_unique(pairs, lines)
    return pairs


def _truth_survivor(source):
    header, rows = _rows(source)
    c_col = _pick(header, ["version_season", "season"], "season")
    a_col = _pick(header, ["castaway_id", "castaway"], "castaway")
    res_col = _pick(header, ["result"], "result", required=False)
    ord_col = _pick(header, ["order"], "order", required=False)
    if res_col is None and ord_col is None:
        raise ParseError("castaways file needs a 'result' or 'order' column", line=1)
    rows = list(rows)
    sizes: dict[str, set[str]] = {}
    for _, row in rows:
        sizes.setdefault(row[c_col], set()).add(normalize_actor_id(row[a_col]))
    best: dict[str, tuple[float, int]] = {}
    for line, row in rows:
        season = row[c_col]
        score = None
        if res_col is not None and row[res_col]:
            score = survivor_outcome_score(row[res_col], len(sizes[season]))
        if score is None and ord_col is not None and row[ord_col]:
            score = _parse_score(row[ord_col], line)
        if score is None:
            raise ParseError(f"cannot place outcome {row.get(res_col, '')!r}", line=line)
        actor = survivor_actor_id(season, row[a_col])
        # a castaway re-entering within a season appears twice; keep the final outcome
        if actor in best:
            logger.warning("line %d: castaway %s listed twice; keeping best outcome", line, actor)
            score = max(score, best[actor][0])
            line = best[actor][1]
        best[actor] = (score, line)
    return [(a, s) for a, (s, _) in sorted(best.items(), key=lambda kv: kv[1][1])]


def parse_ground_truth(source: Source, format: str = "generic") -> GroundTruthTable:
    """Parse ground-truth scores (higher is better) for a dataset format."""
    if format == "generic":
        pairs = _truth_rating(source, ["actor"], ["score"])
    elif format == "chess":
        pairs = _truth_rating(source, ["player", "username", "actor"],
                              ["rating", "glicko", "score"])
    elif format == "dota":
        pairs = _truth_rating(source, ["team_id", "team", "actor"],
                              ["rating", "glicko", "score"])
    elif format == "survivor":
        pairs = _truth_survivor(source)
    else:
        raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}")
    return GroundTruthTable(tuple(pairs))


def write_ground_truth(truth: GroundTruthTable) -> bytes:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["actor", "score"])
    for actor, score in truth.entries:
        w.writerow([actor, repr(float(score))])
    return buf.getvalue().encode("utf-8")


@dataclass
class Alignment:
    labeled: GroundTruthTable
    missing_from_events: list[str] = field(default_factory=list)
    missing_from_truth: list[str] = field(default_factory=list)


def align_ground_truth(truth: GroundTruthTable, actors: Iterable[str]) -> Alignment:
    """Restrict ground truth to actors present in the network, warning about gaps.

    Truth actors absent from the events are kept in ``missing_from_events``
    but dropped from the labeled set, since they have no features.
    """
    actors = list(actors)
    present = set(actors)
    scores = truth.as_dict()
    absent_events = [a for a in truth.actors if a not in present]
    absent_truth = [a for a in actors if a not in scores]
    if absent_events:
        logger.warning("%d ground-truth actors never appear in the events", len(absent_events))
    if absent_truth:
        logger.warning("%d actors have no ground truth and are left unlabeled", len(absent_truth))
    labeled = GroundTruthTable(
        tuple((a, s) for a, s in truth.entries if a in present), truth.tie_policy)
    return Alignment(labeled, absent_events, absent_truth)

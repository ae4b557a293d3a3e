"""JSON file formats and CSV emission.

Capacity::

    {"ground": ["a", "b"],
     "values": [{"set": [], "v": 0}, {"set": ["a"], "v": 0.6}, ...],
     "default": "min-monotone"}          # optional

Entries for the empty set and the whole set are mandatory.  Without
``"default"`` every subset must be listed; with ``"min-monotone"`` a missing
subset takes the largest value among the listed subsets it contains, and
the completed table is validated as usual.

Function: ``{"ground": [...], "f": {"a": 0.2, "b": 0.9}}`` (or ``"f"`` as a
list in ground order).  Game: ``{"players": n, "strategies": [[...], ...],
"payoffs": [tensor_1, ..., tensor_n]}`` with every tensor indexed in player
order, player 1 slowest.  Profile: ``{"capacities": [capacity, ...]}``.
Convexity: ``{"ground": [...], "family": [[...], ...]}``; the empty set and
the whole set are always added.

Labels may be strings, numbers, or lists (read back as tuples, used for
product ground sets).
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .capacity import Capacity, GroundSet, make_capacity
from .convexity import Convexity, make_convexity
from .errors import FormatError, ValidationError
from .games import CapacityProfile, Game
from .integrals import RealFunction


def _label(x):
    if isinstance(x, list):
        return tuple(_label(y) for y in x)
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise FormatError(f"labels must be strings, integers or lists, got {x!r}")


def _json_label(x):
    if isinstance(x, tuple):
        return [_json_label(y) for y in x]
    return x


def read_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}")


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def _ground(obj, key="ground") -> GroundSet:
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"missing {key!r}")
    raw = obj[key]
    if not isinstance(raw, list):
        raise FormatError(f"{key!r} must be a list of labels")
    return GroundSet(tuple(_label(x) for x in raw))


def _snap(v: float, snap: int | None) -> float:
    return v if snap is None else round(v * snap) / snap


def capacity_from_obj(obj, snap: int | None = None) -> Capacity:
    ground = _ground(obj)
    entries = obj.get("values")
    if not isinstance(entries, list):
        raise FormatError("capacity needs a 'values' list of {'set': [...], 'v': number}")
    table: dict[int, float] = {}
    for e in entries:
        if not isinstance(e, dict) or "set" not in e or "v" not in e:
            raise FormatError(f"bad capacity entry {e!r}")
        mask = ground.mask(_label(x) for x in e["set"])
        if mask in table:
            raise FormatError(f"subset {ground.format(mask)} is listed twice")
        v = e["v"]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise FormatError(f"value of {ground.format(mask)} is not a number: {v!r}")
        table[mask] = _snap(float(v), snap)
    for required, name in ((0, "empty set"), (ground.full, "whole set")):
        if required not in table:
            raise FormatError(f"capacity file must list the {name}")
    default = obj.get("default")
    if default is None:
        missing = [m for m in range(ground.n_subsets) if m not in table]
        if missing:
            raise FormatError(
                f"{len(missing)} subsets are missing, e.g. {ground.format(missing[0])}; "
                "list them or set \"default\": \"min-monotone\""
            )
        dense = [table[m] for m in range(ground.n_subsets)]
    elif default == "min-monotone":
        dense = [
            table[m] if m in table else max(v for s, v in table.items() if s & m == s)
            for m in range(ground.n_subsets)
        ]
    else:
        raise FormatError(f"unknown default rule {default!r}")
    return make_capacity(ground, dense)


def capacity_to_obj(c: Capacity) -> dict:
    return {
        "ground": [_json_label(x) for x in c.ground.labels],
        "values": [
            {"set": [_json_label(x) for x in c.ground.members(m)], "v": v}
            for m, v in enumerate(c.values)
        ],
    }


def load_capacity(path, snap: int | None = None) -> Capacity:
    return capacity_from_obj(read_json(path), snap)


def save_capacity(c: Capacity, path) -> None:
    write_json(capacity_to_obj(c), path)


def load_function(path, ground: GroundSet | None = None) -> RealFunction:
    obj = read_json(path)
    g = _ground(obj)
    if ground is not None and g != ground:
        raise ValidationError(f"function ground {g.labels!r} differs from {ground.labels!r}")
    f = obj.get("f")
    if isinstance(f, dict):
        return RealFunction.from_mapping(g, {_label(k): v for k, v in f.items()})
    if isinstance(f, list):
        return RealFunction(g, f)
    raise FormatError("function file needs 'f' as an object or a list")


def function_to_obj(f: RealFunction) -> dict:
    if all(isinstance(x, str) for x in f.ground.labels):
        values = dict(zip(f.ground.labels, f.values))
    else:
        values = list(f.values)
    return {"ground": [_json_label(x) for x in f.ground.labels], "f": values}


def game_from_obj(obj) -> Game:
    if not isinstance(obj, dict):
        raise FormatError("game file must be a JSON object")
    try:
        players = int(obj["players"])
        strategies = obj["strategies"]
        payoffs = obj["payoffs"]
    except (KeyError, TypeError, ValueError):
        raise FormatError("game file needs 'players', 'strategies' and 'payoffs'")
    if len(strategies) != players or len(payoffs) != players:
        raise FormatError(f"'players' is {players} but strategies/payoffs have other lengths")
    sets = tuple(GroundSet(tuple(_label(x) for x in s)) for s in strategies)
    try:
        return Game(sets, tuple(payoffs))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise FormatError(f"payoff tensors are malformed: {exc}")


def game_to_obj(game: Game) -> dict:
    return {
        "players": game.n_players,
        "strategies": [[_json_label(x) for x in g.labels] for g in game.strategy_sets],
        "payoffs": [p.tolist() for p in game.payoffs],
    }


def load_game(path) -> Game:
    return game_from_obj(read_json(path))


def load_profile(path, snap: int | None = None) -> CapacityProfile:
    obj = read_json(path)
    caps = obj.get("capacities") if isinstance(obj, dict) else obj
    if not isinstance(caps, list):
        raise FormatError("profile file needs a 'capacities' list")
    return CapacityProfile(tuple(capacity_from_obj(c, snap) for c in caps))


def profile_to_obj(profile: CapacityProfile) -> dict:
    return {"capacities": [capacity_to_obj(c) for c in profile.capacities]}


def load_convexity(path) -> Convexity:
    obj = read_json(path)
    ground = _ground(obj)
    family = obj.get("family")
    if not isinstance(family, list):
        raise FormatError("convexity file needs a 'family' list of label lists")
    members = [ground.mask(_label(x) for x in member) for member in family]
    return make_convexity(ground, members + [0, ground.full])


def fmt(x) -> str:
    """CSV rendering: floats with 12 significant digits, booleans lower-case."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], path=None) -> str:
    """Write CSV to ``path`` (when given) and return the text."""
    text = render_csv(header, rows)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return text

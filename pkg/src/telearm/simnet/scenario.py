"""Scripted client scenarios.

Script files are line oriented: `<t> <client> <action> [args]`, with `#`
comments.  Actions: connect [host], submit j1 j2 j3 j4 j5 (wire tenths of
a degree), await, ping, disconnect.  Lines sort stably by time; per client
the ordering must be well formed (connect first, nothing after disconnect).
"""

from __future__ import annotations

from dataclasses import dataclass, field

ACTIONS = ("connect", "submit", "await", "ping", "disconnect")


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class ScriptAction:
    t: float
    client: str
    kind: str
    args: tuple = ()


@dataclass(frozen=True)
class ScenarioScript:
    actions: tuple[ScriptAction, ...]
    seed: int = 0

    def __post_init__(self):
        _validate(self.actions)


def _validate(actions: tuple[ScriptAction, ...]) -> None:
    connected: dict[str, bool] = {}
    gone: set[str] = set()
    for action in actions:
        if action.t < 0:
            raise ScriptError(f"negative time in {action}")
        if action.kind not in ACTIONS:
            raise ScriptError(f"unknown action {action.kind!r}")
        if action.client in gone:
            raise ScriptError(f"{action.client}: action after disconnect")
        if action.kind == "connect":
            if connected.get(action.client):
                raise ScriptError(f"{action.client}: double connect")
            connected[action.client] = True
        else:
            if not connected.get(action.client):
                raise ScriptError(f"{action.client}: {action.kind} before connect")
            if action.kind == "disconnect":
                gone.add(action.client)
        if action.kind == "submit":
            if len(action.args) != 5:
                raise ScriptError(f"submit takes 5 joint values, got {action.args}")
            for v in action.args:
                if not isinstance(v, int) or abs(v) > 3600:
                    raise ScriptError(f"submit joint {v!r} outside wire range")


def parse_script(text: str, seed: int = 0) -> ScenarioScript:
    actions: list[ScriptAction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ScriptError(f"line {lineno}: need '<t> <client> <action>'")
        try:
            t = float(parts[0])
        except ValueError:
            raise ScriptError(f"line {lineno}: bad time {parts[0]!r}") from None
        client, kind, rest = parts[1], parts[2], parts[3:]
        if kind == "submit":
            try:
                args: tuple = tuple(int(v) for v in rest)
            except ValueError:
                raise ScriptError(f"line {lineno}: submit joints must be integers") from None
        elif kind == "connect":
            if len(rest) > 1:
                raise ScriptError(f"line {lineno}: connect takes at most a host")
            args = tuple(rest)
        elif rest:
            raise ScriptError(f"line {lineno}: {kind} takes no arguments")
        else:
            args = ()
        actions.append(ScriptAction(t, client, kind, args))
    actions.sort(key=lambda a: a.t)  # stable: equal times keep file order
    return ScenarioScript(tuple(actions), seed=seed)


def reference_script(cycles: int = 3, pings: int = 5, client: str = "op1", seed: int = 0) -> ScenarioScript:
    """Connect, measure the echo a few times, run 90-degree cycles, leave.

    Alternating 0 <-> 90 degree base-joint setpoints make every cycle the
    3-second reference task.
    """
    actions = [ScriptAction(0.0, client, "connect", (f"{client}.sim",))]
    t = 0.1
    for _ in range(pings):
        actions.append(ScriptAction(t, client, "ping"))
        t += 0.05
    t = 1.0
    for k in range(cycles):
        target = 900 if k % 2 == 0 else 0
        actions.append(ScriptAction(t, client, "submit", (target, 0, 0, 0, 0)))
        actions.append(ScriptAction(t, client, "await"))
        t += 0.5
    actions.append(ScriptAction(t, client, "disconnect"))
    return ScenarioScript(tuple(actions), seed=seed)

"""Line-oriented scenario files.

One command per line, ``#`` starts a comment::

    <at> <verb> <args...>

``at`` is virtual seconds, optionally suffixed ``m``, ``h`` or ``d``.
Hostnames are double-quoted. Verbs and their arguments::

    join <ip> [key=<label>]
    leave <ip>
    register <ip> "<hostname>"
    update <ip> "<hostname>" [<new_ip>]
    resolve <ip> "<hostname>" [<service>] [delegated]
    reverse <ip> <target_ip>
    snsd-load <ip> <snsd_nodes path, relative to the scenario file>
    snsd-register <ip> "<hostname>"
    advance
"""

import re
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

from .errors import AndnaError, ScenarioError
from .idspace import parse_ip
from .netsim import SimConfig, Simulation

VERBS = {
    "join": (1, 2),
    "leave": (1, 1),
    "register": (2, 2),
    "update": (2, 3),
    "resolve": (2, 4),
    "reverse": (2, 2),
    "snsd-load": (2, 2),
    "snsd-register": (2, 2),
    "advance": (0, 0),
}

_UNITS = {"": 1, "s": 1, "m": 60, "h": 3600, "d": 86400}
_TIME = re.compile(r"^(\d+)([smhd]?)$")


@dataclass(frozen=True)
class ScenarioCommand:
    at: int
    verb: str
    args: Tuple[str, ...]
    lineno: int = 0


def parse_time(text: str) -> int:
    m = _TIME.match(text)
    if not m:
        raise ValueError(f"bad time {text!r}")
    return int(m.group(1)) * _UNITS[m.group(2)]


def _check_args(verb: str, args: List[str]) -> None:
    if verb in ("join", "leave", "register", "update", "resolve", "reverse", "snsd-load", "snsd-register"):
        parse_ip(args[0])
    if verb == "reverse":
        parse_ip(args[1])
    if verb == "update" and len(args) == 3:
        parse_ip(args[2])
    if verb == "join" and len(args) == 2 and not args[1].startswith("key="):
        raise ValueError(f"expected key=<label>, got {args[1]!r}")
    if verb == "resolve":
        for extra in args[2:]:
            if extra != "delegated" and not extra.isdigit():
                raise ValueError(f"expected a service number or 'delegated', got {extra!r}")


def parse_scenario(text: str) -> List[ScenarioCommand]:
    """Parse scenario text; raises :class:`ScenarioError` on the first bad line."""
    out = []
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            toks = shlex.split(line, comments=True)
        except ValueError as exc:
            raise ScenarioError(lineno, str(exc)) from None
        if len(toks) < 2:
            raise ScenarioError(lineno, "expected '<at> <verb> [args...]'")
        try:
            at = parse_time(toks[0])
        except ValueError as exc:
            raise ScenarioError(lineno, str(exc)) from None
        verb, args = toks[1], toks[2:]
        if verb not in VERBS:
            raise ScenarioError(lineno, f"unknown verb {verb!r}")
        lo, hi = VERBS[verb]
        if not lo <= len(args) <= hi:
            raise ScenarioError(lineno, f"{verb} takes {lo}..{hi} arguments, got {len(args)}")
        try:
            _check_args(verb, args)
        except ValueError as exc:
            raise ScenarioError(lineno, str(exc)) from None
        if at < last:
            raise ScenarioError(lineno, f"time {at} is before the previous command ({last})")
        last = at
        out.append(ScenarioCommand(at, verb, tuple(args), lineno))
    return out


def execute(sim: Simulation, cmd: ScenarioCommand, base_dir: Path) -> None:
    a = cmd.args
    if cmd.verb == "join":
        label = a[1][len("key="):] if len(a) > 1 else ""
        sim.join(a[0], key_label=label)
    elif cmd.verb == "leave":
        sim.leave(a[0])
    elif cmd.verb == "register":
        sim.start_register(a[0], a[1])
    elif cmd.verb == "update":
        sim.start_update(a[0], a[1], a[2] if len(a) > 2 else None)
    elif cmd.verb == "resolve":
        rest = a[2:]
        service = next((int(x) for x in rest if x.isdigit()), 0)
        sim.start_resolve(a[0], a[1], service, delegated="delegated" in rest)
    elif cmd.verb == "reverse":
        sim.start_reverse(a[0], a[1])
    elif cmd.verb == "snsd-load":
        path = base_dir / a[1]
        sim.snsd_load(a[0], path.read_bytes(), path.parent)
    elif cmd.verb == "snsd-register":
        sim.start_snsd_register(a[0], a[1])


@dataclass
class RunResult:
    log: List[str]
    errors: int
    rejections: int
    sim: Simulation

    @property
    def text(self) -> str:
        return "".join(line + "\n" for line in self.log)


def run_commands(commands: List[ScenarioCommand], config: Optional[SimConfig] = None,
                 base_dir: Union[str, Path] = ".") -> RunResult:
    sim = Simulation(config)
    base = Path(base_dir)
    errors = [0]

    def make(cmd):
        def fn():
            try:
                execute(sim, cmd, base)
            except (AndnaError, ValueError, OSError) as exc:
                errors[0] += 1
                label, text = getattr(exc, "reason", type(exc).__name__), str(exc)
                sim.note(cmd.args[0] if cmd.args else "-", cmd.verb, f"line {cmd.lineno}",
                         f"error: {label}" + (f" ({text})" if text != label else ""))
        return fn

    for cmd in commands:
        sim.schedule_call(cmd.at, make(cmd))
    if commands:
        sim.advance_to(commands[-1].at)
    sim.settle()
    rejections = sum(1 for o in sim.outcomes if o.verdict not in ("ok", "pass"))
    return RunResult(sim.log, errors[0], rejections, sim)


def run_scenario(path: Union[str, Path], config: Optional[SimConfig] = None) -> RunResult:
    path = Path(path)
    commands = parse_scenario(path.read_text())
    return run_commands(commands, config, path.parent)

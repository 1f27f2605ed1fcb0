"""Four-party session simulator for the MS1/MS2/MU1/MU2 methods under adversary models 1-3."""
from __future__ import annotations

import json
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np

from .arrangement import OK, ArrangementLayout, assign_cues, verify_arrangement
from .barcode import BarcodeImage, BarcodeSpec, decode_barcode, encode_barcode, interior_matrix, observe_cue
from .ecc import DEFAULT_POLICY
from .errors import AuthError, ChannelError, ConfigError, CuebarError, DecodeError, RejectError
from .glyphs import read_cue
from .keys import SessionKey, keygen
from .payload import from_readable, protect, to_readable, unprotect


class Role(str, Enum):
    USER = "USER"
    SERVER = "SERVER"
    MOBILE = "MOBILE"
    TERMINAL = "TERMINAL"


class Medium(str, Enum):
    NETWORK = "NETWORK"
    DISPLAY = "DISPLAY"
    KEYBOARD = "KEYBOARD"
    VISUAL = "VISUAL"
    MOBILE_DISPLAY = "MOBILE_DISPLAY"
    MOBILE_INPUT = "MOBILE_INPUT"


class Method(str, Enum):
    MS1 = "MS1"
    MS2 = "MS2"
    MU1 = "MU1"
    MU2 = "MU2"


@dataclass(frozen=True)
class ChannelEdge:
    src: Role
    dst: Role
    medium: Medium

    def __str__(self) -> str:
        return f"{self.src.value}->{self.dst.value}/{self.medium.value}"


S, T, U, M = Role.SERVER, Role.TERMINAL, Role.USER, Role.MOBILE
EDGES: dict[tuple[Role, Role], ChannelEdge] = {
    (a, b): ChannelEdge(a, b, med) for a, b, med in [
        (S, T, Medium.NETWORK), (T, S, Medium.NETWORK),
        (T, U, Medium.DISPLAY), (U, T, Medium.KEYBOARD),
        (T, M, Medium.VISUAL),
        (M, U, Medium.MOBILE_DISPLAY), (U, M, Medium.MOBILE_INPUT),
    ]
}


def edge(src: Role, dst: Role) -> ChannelEdge:
    try:
        return EDGES[(Role(src), Role(dst))]
    except KeyError:
        raise ChannelError(f"no channel from {Role(src).value} to {Role(dst).value}") from None


# ---------------------------------------------------------------------------
# strategies

@dataclass
class View:
    """What one party has seen so far, plus its private state."""

    method: Method
    role: Role
    history: list = field(default_factory=list)  # (edge, payload) delivered to this role
    key: SessionKey | None = None
    target: bytes | None = None
    layout: ArrangementLayout | None = None
    spec: BarcodeSpec | None = None


class Strategy:
    """A dishonest party's behaviour: maps (step, input, view, rng) to what it emits.

    Returning ``HONEST`` from ``act`` defers to the honest behaviour.
    """

    name: str = "honest"
    role: Role = Role.TERMINAL

    def act(self, step: str, incoming: Any, view: View, rng: np.random.Generator) -> Any:
        return HONEST

    def __repr__(self) -> str:
        return self.name


HONEST = object()


@dataclass(frozen=True)
class Display:
    """What a terminal puts on screen: barcode blocks and optional plain text."""

    blocks: tuple
    text: bytes | None = None


def _forge_blocks(m: bytes, view: View, rng) -> tuple:
    fake = keygen(int(rng.integers(0, 2**63)))
    return tuple(_encode_blocks(m, fake, view.layout, view.spec, rng))


class TerminalEavesdrop(Strategy):
    name, role = "terminal-eavesdrop", Role.TERMINAL


class TerminalSubstitute(Strategy):
    """Push the target m' in place of the authentic message."""

    name, role = "terminal-substitute", Role.TERMINAL

    def act(self, step, incoming, view, rng):
        mt = view.target
        if view.method is Method.MS1 and step == "display":
            return Display(_forge_blocks(mt, view, rng))
        if view.method is Method.MS2 and step == "display":
            return Display(incoming.blocks, mt)
        if view.method is Method.MU1 and step == "forward":
            fake = keygen(int(rng.integers(0, 2**63)))
            return to_readable(protect(mt, fake, rng.bytes(16)))
        if view.method is Method.MU2 and step == "forward":
            return mt
        if view.method is Method.MU2 and step == "forward_code":
            # user declines to type c for the wrong message: guess it
            return incoming if incoming is not None else f"{int(rng.integers(0, 2**32)):08x}"
        return HONEST


class TerminalRearrange(Strategy):
    name, role = "terminal-rearrange", Role.TERMINAL

    def act(self, step, incoming, view, rng):
        if step == "display" and len(incoming.blocks) > 1:
            return Display(tuple(reversed(incoming.blocks)), incoming.text)
        if view.method is Method.MU1 and step == "forward" and len(incoming) >= 16:
            return incoming[8:16] + incoming[:8] + incoming[16:]
        return HONEST


class TerminalReplay(Strategy):
    """Within-session replay: show an earlier block again at a later position."""

    name, role = "terminal-replay", Role.TERMINAL

    def act(self, step, incoming, view, rng):
        if step == "display" and len(incoming.blocks) > 1:
            blocks = list(incoming.blocks)
            blocks[-1] = blocks[0]
            return Display(tuple(blocks), incoming.text)
        return HONEST


def _alter(m: bytes) -> bytes:
    if not m:
        return b"X"
    return bytes([m[0] ^ 0x01]) + m[1:]


class MobileAlwaysAccept(Strategy):
    """Vouch for anything: never reject, and present an altered message as authentic."""

    name, role = "mobile-always-accept", Role.MOBILE

    def act(self, step, incoming, view, rng):
        if step == "capture":
            return _alter(_decode_loose(incoming, view, rng))
        if step == "encrypt":
            return to_readable(protect(_alter(incoming), view.key, rng.bytes(16)))
        if step == "capture_code":
            body = _decode_loose(incoming, view, rng)
            return _alter(body[:-4]), body[-4:].hex()
        return HONEST


CONSTANT_DISPLAY = b"AUTHENTIC"


class MobileDisplayConstant(Strategy):
    name, role = "mobile-display-constant", Role.MOBILE

    def act(self, step, incoming, view, rng):
        if step == "capture":
            return CONSTANT_DISPLAY
        if step == "encrypt":
            return "A" * 64
        if step == "capture_code":
            return CONSTANT_DISPLAY, "00000000"
        return HONEST


class MobileDisplayRandom(Strategy):
    name, role = "mobile-display-random", Role.MOBILE

    def act(self, step, incoming, view, rng):
        if step == "capture":
            return random_text(rng, 16 * len(incoming.blocks))
        if step == "encrypt":
            return "".join(rng.choice(list(string.ascii_uppercase + "234567"), size=64))
        if step == "capture_code":
            return random_text(rng, 16), f"{int(rng.integers(0, 2**32)):08x}"
        return HONEST


def builtin_strategies() -> dict[str, Strategy]:
    items = [TerminalEavesdrop(), TerminalSubstitute(), TerminalRearrange(), TerminalReplay(),
             MobileAlwaysAccept(), MobileDisplayConstant(), MobileDisplayRandom()]
    return {s.name: s for s in items}


# ---------------------------------------------------------------------------
# parties and sessions

@dataclass
class Party:
    role: Role
    strategy: Strategy | None = None  # None: honest
    key: SessionKey | None = None
    target: bytes | None = None  # A_T's m'

    def __post_init__(self):
        self.role = Role(self.role)
        if self.key is not None and self.role not in (Role.SERVER, Role.MOBILE):
            raise ConfigError(f"{self.role.value} must not hold the session key")
        if self.strategy is not None:
            if self.role not in (Role.TERMINAL, Role.MOBILE):
                raise ConfigError(f"{self.role.value} cannot be dishonest in any model")
            if self.strategy.role is not self.role:
                raise ConfigError(f"strategy {self.strategy.name} is for {self.strategy.role.value}")
        if self.target is not None and self.role is not Role.TERMINAL:
            raise ConfigError("only the terminal adversary has a target message")

    @property
    def honest(self) -> bool:
        return self.strategy is None


@dataclass
class SessionOutcome:
    method: Method
    transcript: list  # (ChannelEdge, label, payload)
    accepted: bool
    accepted_value: bytes | None
    authentic: bytes
    attack_succeeded: bool

    def observed_by(self, role: Role) -> list:
        return [(e, lab, p) for e, lab, p in self.transcript if role in (e.src, e.dst)]


@dataclass
class SimConfig:
    spec: BarcodeSpec = field(default_factory=lambda: BarcodeSpec(24, 42))
    ms_blocks: int = 2
    ms_chunk: int = 24  # message bytes per MS block
    mu_length: int = 16
    policy: Any = DEFAULT_POLICY


DEFAULT_SIM = SimConfig()


def random_text(rng: np.random.Generator, n: int) -> bytes:
    alphabet = np.frombuffer((string.ascii_letters + string.digits).encode(), dtype=np.uint8)
    return rng.choice(alphabet, size=n).tobytes()


def _chunks(m: bytes, n: int) -> list[bytes]:
    size = -(-len(m) // n)
    return [m[i * size:(i + 1) * size] for i in range(n)]


def _encode_blocks(m: bytes, key: SessionKey, layout: ArrangementLayout, spec: BarcodeSpec, rng) -> list:
    cues = assign_cues(layout)
    return [encode_barcode(key, part, cue, spec, rng.bytes(16))
            for part, cue in zip(_chunks(m, layout.n_blocks), cues)]


def _decode_loose(display: Display, view: View, rng) -> bytes:
    parts = []
    for b in display.blocks:
        try:
            parts.append(decode_barcode(b, view.key, spec=view.spec)[0])
        except CuebarError:
            parts.append(random_text(rng, 8))
    return b"".join(parts)


class _Session:
    def __init__(self, method: Method, parties: dict[Role, Party], sim: SimConfig, rng: np.random.Generator):
        self.method = method
        self.parties = parties
        self.sim = sim
        self.transcript: list = []
        kids = rng.spawn(4)
        self.rngs = dict(zip((Role.SERVER, Role.TERMINAL, Role.MOBILE, Role.USER), kids))
        layout = ArrangementLayout.linear(sim.ms_blocks) if method in (Method.MS1, Method.MS2) \
            else ArrangementLayout.single()
        self.layout = layout
        self.views = {r: View(method, r, key=p.key, target=p.target, layout=layout, spec=sim.spec)
                      for r, p in parties.items()}

    def send(self, src: Role, dst: Role, label: str, payload):
        e = edge(src, dst)
        self.transcript.append((e, label, payload))
        self.views[dst].history.append((e, payload))
        return payload

    def act(self, role: Role, step: str, incoming, honest: Callable[[], Any]):
        p = self.parties[role]
        if p.strategy is not None:
            out = p.strategy.act(step, incoming, self.views[role], self.rngs[role])
            if out is not HONEST:
                return out
        return honest()

    # honest building blocks

    def user_checks_cues(self, display: Display) -> bool:
        observed = [tuple(read_cue(observe_cue(b, self.sim.spec))) for b in display.blocks]
        return verify_arrangement(observed, self.layout) is OK

    def mobile_decode(self, display: Display) -> bytes | None:
        key = self.parties[Role.MOBILE].key
        try:
            return b"".join(decode_barcode(b, key, self.sim.policy, self.sim.spec)[0] for b in display.blocks)
        except (RejectError, AuthError, DecodeError):
            return None


def _check_parties(parties: Sequence[Party]) -> dict[Role, Party]:
    by_role: dict[Role, Party] = {}
    for p in parties:
        if p.role in by_role:
            raise ConfigError(f"duplicate {p.role.value}")
        by_role[p.role] = p
    missing = set(Role) - set(by_role)
    if missing:
        raise ConfigError(f"missing roles: {sorted(r.value for r in missing)}")
    if by_role[Role.SERVER].key is None or by_role[Role.MOBILE].key is None:
        raise ConfigError("server and mobile must hold the session key")
    if by_role[Role.MOBILE].honest and by_role[Role.MOBILE].key != by_role[Role.SERVER].key:
        raise ConfigError("honest mobile must share the server's session key")
    return by_role


def run_method(method, parties: Sequence[Party], m: bytes, seed, sim: SimConfig = DEFAULT_SIM) -> SessionOutcome:
    """Run one session of `method` delivering the authentic message `m`."""
    method = Method(method)
    ps = _check_parties(parties)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sess = _Session(method, ps, sim, rng)
    accepted, value = {
        Method.MS1: _ms, Method.MS2: _ms, Method.MU1: _mu1, Method.MU2: _mu2,
    }[method](sess, m)
    value = value if accepted else None
    succeeded = bool(accepted and value != m)
    return SessionOutcome(method, sess.transcript, bool(accepted), value, m, succeeded)


def _ms(s: _Session, m: bytes):
    key = s.parties[S].key
    blocks = tuple(_encode_blocks(m, key, s.layout, s.sim.spec, s.rngs[S]))
    two = s.method is Method.MS2
    s.send(S, T, "barcodes", Display(blocks, m if two else None))
    incoming = Display(blocks, m if two else None)
    shown = s.act(T, "display", incoming, lambda: incoming)
    s.send(T, U, "display", shown)
    cues_ok = s.user_checks_cues(shown)
    s.send(T, M, "capture", Display(shown.blocks))
    mobile_out = s.act(M, "capture", Display(shown.blocks), lambda: s.mobile_decode(Display(shown.blocks)))
    s.send(M, U, "mobile_display", mobile_out)
    if not cues_ok or mobile_out is None:
        return False, None
    if two:
        return shown.text == mobile_out, shown.text
    return True, mobile_out


def _mu1(s: _Session, m: bytes):
    s.send(U, M, "message", m)
    key = s.parties[M].key
    readable = s.act(M, "encrypt", m, lambda: to_readable(protect(m, key, s.rngs[M].bytes(16))))
    s.send(M, U, "readable", readable)
    s.send(U, T, "typed", readable)
    fwd = s.act(T, "forward", readable, lambda: readable)
    s.send(T, S, "readable", fwd)
    try:
        return True, unprotect(from_readable(fwd), s.parties[S].key)
    except (AuthError, DecodeError):
        return False, None


def _mu2(s: _Session, m: bytes):
    s.send(U, T, "typed", m)
    fwd = s.act(T, "forward", m, lambda: m)
    s.send(T, S, "message", fwd)
    srng = s.rngs[S]
    code = int(srng.integers(0, 2**32)).to_bytes(4, "big")
    block = encode_barcode(s.parties[S].key, fwd + code, assign_cues(s.layout)[0], s.sim.spec, srng.bytes(16))
    incoming = Display((block,))
    s.send(S, T, "barcode", incoming)
    shown = s.act(T, "display", incoming, lambda: incoming)
    s.send(T, U, "display", shown)
    cues_ok = s.user_checks_cues(shown)
    s.send(T, M, "capture", shown)

    def honest_mobile():
        body = s.mobile_decode(shown)
        return None if body is None or len(body) < 4 else (body[:-4], body[-4:].hex())

    mobile_out = s.act(M, "capture_code", shown, honest_mobile)
    s.send(M, U, "mobile_display", mobile_out)
    typed = mobile_out[1] if cues_ok and mobile_out is not None and mobile_out[0] == m else None
    if typed is not None:
        s.send(U, T, "code", typed)
    sent = s.act(T, "forward_code", typed, lambda: typed)
    if sent is None:
        return False, None
    s.send(T, S, "code", sent)
    return sent == code.hex(), fwd


# ---------------------------------------------------------------------------
# security evaluation

LEAK_WINDOW = 8


def _payload_bytes(p) -> bytes:
    if p is None:
        return b""
    if isinstance(p, bytes):
        return p
    if isinstance(p, str):
        return p.encode()
    if isinstance(p, BarcodeImage):
        return np.packbits(interior_matrix(p, p.spec)).tobytes()
    if isinstance(p, Display):
        return b"".join(_payload_bytes(b) for b in p.blocks) + _payload_bytes(p.text)
    if isinstance(p, (tuple, list)):
        return b"".join(_payload_bytes(x) for x in p)
    raise TypeError(f"cannot serialise {type(p).__name__}")


def terminal_leaks(outcome: SessionOutcome, plaintext: bytes, window: int = LEAK_WINDOW) -> bool:
    """True if any `window`-byte run of the plaintext appears in what the terminal handled."""
    seen = b"\x00".join(_payload_bytes(p) for _, _, p in outcome.observed_by(Role.TERMINAL))
    return any(plaintext[i:i + window] in seen for i in range(len(plaintext) - window + 1))


def strategy_assignments(model: int, strategies: Sequence[Strategy]) -> list[tuple]:
    """(terminal strategy, mobile strategy) pairs the model allows; None is honest."""
    ts = [s for s in strategies if s.role is Role.TERMINAL]
    ms = [s for s in strategies if s.role is Role.MOBILE]
    if model == 1:
        if ms or not ts:
            raise ConfigError("model 1 trusts the mobile: give terminal strategies only")
        return [(t, None) for t in ts]
    if model == 2:
        if not strategies:
            raise ConfigError("model 2 needs at least one strategy")
        return [(t, None) for t in ts] + [(None, m) for m in ms]
    if model == 3:
        if not ts or not ms:
            raise ConfigError("model 3 needs both terminal and mobile strategies")
        return [(t, m) for t in ts for m in ms]
    raise ConfigError(f"unknown model {model}")


def _label(pair: tuple) -> str:
    return "+".join(s.name for s in pair if s is not None)


def _message_length(method: Method, sim: SimConfig) -> int:
    return sim.ms_blocks * sim.ms_chunk if method in (Method.MS1, Method.MS2) else sim.mu_length


def run_trial(method, model: int, pair: tuple, seed: int, t: int, sim: SimConfig = DEFAULT_SIM) -> tuple[bool, bool]:
    """One seeded session with fresh key and messages; returns (attack succeeded, terminal saw plaintext)."""
    method = Method(method)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
    key = keygen(int(rng.integers(0, 2**63)))
    n = _message_length(method, sim)
    m, target = random_text(rng, n), random_text(rng, n)
    tstrat, mstrat = pair
    parties = [Party(Role.USER), Party(Role.SERVER, key=key),
               Party(Role.TERMINAL, tstrat, target=target if tstrat else None),
               Party(Role.MOBILE, mstrat, key=key)]
    out = run_method(method, parties, m, rng, sim)
    return out.attack_succeeded, model == 1 and terminal_leaks(out, m)


def _run_chunk(args) -> tuple[int, bool]:
    method, model, pair, seed, lo, hi, sim = args
    wins, leak = 0, False
    for t in range(lo, hi):
        ok, lk = run_trial(method, model, pair, seed, t, sim)
        wins += ok
        leak |= lk
    return wins, leak


@dataclass
class StrategyResult:
    strategy: str
    successes: int
    trials: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


@dataclass
class SecurityReport:
    method: Method
    model: int
    trials: int
    seed: int
    results: list
    confidentiality_smoke: bool | None = None  # model 1 only

    @property
    def max_rate(self) -> float:
        return max(r.rate for r in self.results)

    def rate(self, strategy: str) -> float:
        return next(r.rate for r in self.results if r.strategy == strategy)

    def to_json(self) -> dict:
        rows = []
        for r in self.results:
            row = {"method": self.method.value, "model": self.model, "strategy": r.strategy,
                   "trials": r.trials, "successes": r.successes, "rate": r.rate, "seed": self.seed}
            if self.confidentiality_smoke is not None:
                row["confidentiality_smoke"] = self.confidentiality_smoke
            rows.append(row)
        return {"method": self.method.value, "model": self.model, "trials": self.trials, "seed": self.seed,
                "confidentiality_smoke": self.confidentiality_smoke, "results": rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def evaluate_security(method, model: int, strategies: Sequence[Strategy] | None = None, trials: int = 1000,
                      seed: int = 0, sim: SimConfig = DEFAULT_SIM, workers: int = 1) -> SecurityReport:
    """Attack success rate of each strategy assignment the model allows.

    Trial t always uses SeedSequence(seed, spawn_key=(t,)), so results do not
    depend on how trials are split across workers.
    """
    method = Method(method)
    if strategies is None:
        strategies = list(builtin_strategies().values())
        if model == 1:
            strategies = [s for s in strategies if s.role is Role.TERMINAL]
    pairs = strategy_assignments(model, strategies)
    n_chunks = max(1, workers) * 4 if workers > 1 else 1
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    results, leaked = [], False
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for pair in pairs:
            jobs = [(method, model, pair, seed, int(lo), int(hi), sim) for lo, hi in zip(bounds, bounds[1:])]
            parts = list(pool.map(_run_chunk, jobs)) if pool else [_run_chunk(j) for j in jobs]
            results.append(StrategyResult(_label(pair), sum(w for w, _ in parts), trials))
            leaked |= any(lk for _, lk in parts)
    finally:
        if pool:
            pool.shutdown()
    return SecurityReport(method, model, trials, seed, results, (not leaked) if model == 1 else None)

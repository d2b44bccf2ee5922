"""Stateless RTT probing between two peers with unsynchronized clocks.

All timestamps and durations in this module are integer microseconds. The
client stamps requests with its own clock and the server stamps responses
with its own; neither clock needs to agree with the other. Each message
carries three values:

  request:  round counter k, the client send time, the server's previous
            response send time echoed back, and the client's idle time since
            the previous response arrived (the latter two absent at k=1)
  response: the server send time, the request's send time echoed back, and
            the server's processing time for this request

From these, both ends recover the pure network round trip while keeping only
the previous round's values:

  client:  rtt = response_received - request_sent - server_processing
  server:  rtt = request_received - own_previous_send - client_idle

Every subtraction pairs timestamps from the same clock, so constant clock
offsets cancel exactly; processing and idle time are excluded explicitly.
The client produces a sample every round, the server from round 2 on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import Literal

SENTINEL = 0xFFFF_FFFF_FFFF_FFFF  # wire encoding of an absent first-round field
MAGIC = 0x5052
REQUEST_TYPE = 0x01
RESPONSE_TYPE = 0x02

# magic u16 | type u8 | reserved u8 | round u32 | three u64 fields, big-endian
_FRAME = struct.Struct(">HBBIQQQ")
FRAME_SIZE = _FRAME.size


class ProtocolError(Exception):
    """A message violates the probe protocol (stale echo, bad round, negative rtt)."""


class CodecError(Exception):
    """A byte sequence is not a valid probe frame."""


@dataclass(frozen=True)
class SimClock:
    """Node-local clock: global time plus a fixed signed offset, no drift."""

    offset: int = 0

    def now(self, global_time: int) -> int:
        return global_time + self.offset


@dataclass(frozen=True)
class ProbeRequest:
    round_no: int                    # k, starts at 1
    sent_at: int                     # client clock
    prev_server_sent_at: int | None  # server's previous response send time, echoed back
    idle_time: int | None            # client time between previous response and this send

    def __post_init__(self) -> None:
        if self.round_no < 1:
            raise ValueError(f"round_no starts at 1, got {self.round_no}")
        first = self.round_no == 1
        if first != (self.prev_server_sent_at is None) or first != (self.idle_time is None):
            raise ValueError("prev_server_sent_at and idle_time are absent exactly at round 1")
        if self.idle_time is not None and self.idle_time < 0:
            raise ValueError(f"idle_time must be non-negative, got {self.idle_time}")


@dataclass(frozen=True)
class ProbeResponse:
    round_no: int
    sent_at: int          # server clock
    request_sent_at: int  # echo of the request's sent_at
    processing_time: int  # server time between request receipt and response send

    def __post_init__(self) -> None:
        if self.round_no < 1:
            raise ValueError(f"round_no starts at 1, got {self.round_no}")
        if self.processing_time < 0:
            raise ValueError(f"processing_time must be non-negative, got {self.processing_time}")


@dataclass(frozen=True)
class RttSample:
    rtt_us: int
    round_no: int
    side: Literal["client", "server"]


@dataclass(frozen=True)
class ClientProbeState:
    """Client bookkeeping for one peer; holds the previous round only."""

    next_round: int = 1
    prev_received_at: int | None = None     # client clock, previous response arrival
    prev_server_sent_at: int | None = None  # server clock, from the previous response
    pending_round: int | None = None        # round of the in-flight request, if any
    pending_sent_at: int | None = None


@dataclass(frozen=True)
class ServerProbeState:
    """Server bookkeeping for one peer: send time of its previous response."""

    prev_sent_at: int | None = None


def build_probe_request(
    state: ClientProbeState, now_local: int
) -> tuple[ProbeRequest, ClientProbeState]:
    """Stamp the next request at client time `now_local`."""
    for earlier in (state.prev_received_at, state.pending_sent_at):
        if earlier is not None and now_local < earlier:
            raise ValueError(f"client clock went backwards: {now_local} < {earlier}")
    k = state.next_round
    if k == 1:
        req = ProbeRequest(k, now_local, None, None)
    else:
        if state.prev_received_at is None or state.prev_server_sent_at is None:
            raise ProtocolError(f"round {k} request needs a processed round {k - 1} response")
        req = ProbeRequest(
            k, now_local, state.prev_server_sent_at, now_local - state.prev_received_at
        )
    new_state = replace(state, next_round=k + 1, pending_round=k, pending_sent_at=now_local)
    return req, new_state


def handle_probe_request(
    state: ServerProbeState, req: ProbeRequest, received_at: int, send_at: int
) -> tuple[ProbeResponse, RttSample | None, ServerProbeState]:
    """Answer a request received at server time `received_at`, replying at `send_at`.

    Emits a server-side RTT sample from round 2 on; round 1 has no previous
    response to measure against.
    """
    if send_at < received_at:
        raise ValueError(f"response send time {send_at} precedes receipt {received_at}")
    sample = None
    if req.round_no >= 2:
        if req.prev_server_sent_at is None or req.idle_time is None:
            # unreachable for requests built by this module; guards foreign ones
            raise ProtocolError(f"round {req.round_no} request lacks previous-round fields")
        if state.prev_sent_at is not None:
            if req.prev_server_sent_at != state.prev_sent_at:
                raise ProtocolError(
                    f"request echoes send time {req.prev_server_sent_at}, "
                    f"expected {state.prev_sent_at}"
                )
            rtt = received_at - req.prev_server_sent_at - req.idle_time
            if rtt < 0:
                raise ProtocolError(f"computed server rtt is negative ({rtt})")
            sample = RttSample(rtt, req.round_no, "server")
    resp = ProbeResponse(req.round_no, send_at, req.sent_at, send_at - received_at)
    return resp, sample, ServerProbeState(prev_sent_at=send_at)


def handle_probe_response(
    state: ClientProbeState, resp: ProbeResponse, received_at: int
) -> tuple[RttSample, ClientProbeState]:
    """Consume the response to the outstanding request, received at client time."""
    if state.pending_round is None or state.pending_sent_at is None:
        raise ProtocolError("no request outstanding")
    if resp.round_no != state.pending_round or resp.request_sent_at != state.pending_sent_at:
        raise ProtocolError(
            f"response (round {resp.round_no}, echo {resp.request_sent_at}) does not match "
            f"outstanding request (round {state.pending_round}, sent {state.pending_sent_at})"
        )
    if received_at < state.pending_sent_at:
        raise ValueError(f"client clock went backwards: {received_at} < {state.pending_sent_at}")
    rtt = received_at - state.pending_sent_at - resp.processing_time
    if rtt < 0:
        raise ProtocolError(f"computed client rtt is negative ({rtt}); sample discarded")
    sample = RttSample(rtt, resp.round_no, "client")
    new_state = ClientProbeState(
        next_round=state.next_round,
        prev_received_at=received_at,
        prev_server_sent_at=resp.sent_at,
        pending_round=None,
        pending_sent_at=None,
    )
    return sample, new_state


def simulate_probe_exchange(
    one_way_out: int,
    one_way_back: int,
    processing: int,
    client_offset: int,
    server_offset: int,
    rounds: int,
    idle: int = 0,
) -> list[tuple[RttSample, RttSample | None]]:
    """Drive both state machines over a deterministic two-node timeline.

    The client sends round 1 at global time 0 and sends each following
    request `idle` microseconds after the previous response arrives. Returns
    one (client sample, server sample) pair per round; the server sample is
    None at round 1. Every sample equals one_way_out + one_way_back exactly,
    independent of processing time and of either clock offset.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    for name, value in (
        ("one_way_out", one_way_out),
        ("one_way_back", one_way_back),
        ("processing", processing),
        ("idle", idle),
    ):
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")

    client_clock = SimClock(client_offset)
    server_clock = SimClock(server_offset)
    client_state = ClientProbeState()
    server_state = ServerProbeState()

    samples: list[tuple[RttSample, RttSample | None]] = []
    t = 0  # global time, microseconds
    for _ in range(rounds):
        req, client_state = build_probe_request(client_state, client_clock.now(t))
        t_server_recv = t + one_way_out
        t_server_send = t_server_recv + processing
        resp, server_sample, server_state = handle_probe_request(
            server_state, req, server_clock.now(t_server_recv), server_clock.now(t_server_send)
        )
        t_client_recv = t_server_send + one_way_back
        client_sample, client_state = handle_probe_response(
            client_state, resp, client_clock.now(t_client_recv)
        )
        samples.append((client_sample, server_sample))
        t = t_client_recv + idle
    return samples


def _to_wire(value: int | None) -> int:
    if value is None:
        return SENTINEL
    if not 0 <= value < SENTINEL:
        raise ValueError(f"field {value} outside the encodable range [0, 2^64-1)")
    return value


def encode_probe(msg: ProbeRequest | ProbeResponse) -> bytes:
    """Serialize a message to its fixed-size big-endian frame."""
    if isinstance(msg, ProbeRequest):
        mtype = REQUEST_TYPE
        fields = (_to_wire(msg.sent_at), _to_wire(msg.prev_server_sent_at), _to_wire(msg.idle_time))
    elif isinstance(msg, ProbeResponse):
        mtype = RESPONSE_TYPE
        fields = (_to_wire(msg.sent_at), _to_wire(msg.request_sent_at), _to_wire(msg.processing_time))
    else:
        raise TypeError(f"cannot encode {type(msg).__name__}")
    if not 1 <= msg.round_no <= 0xFFFF_FFFF:
        raise ValueError(f"round_no {msg.round_no} outside the u32 range")
    return _FRAME.pack(MAGIC, mtype, 0, msg.round_no, *fields)


def decode_probe(data: bytes) -> ProbeRequest | ProbeResponse:
    """Parse a frame; raises CodecError on anything malformed."""
    if len(data) != FRAME_SIZE:
        raise CodecError(f"frame must be {FRAME_SIZE} bytes, got {len(data)}")
    magic, mtype, reserved, round_no, f1, f2, f3 = _FRAME.unpack(data)
    if magic != MAGIC:
        raise CodecError(f"bad magic 0x{magic:04x}")
    if reserved != 0:
        raise CodecError(f"reserved byte must be 0, got {reserved}")
    try:
        if mtype == REQUEST_TYPE:
            if f1 == SENTINEL:
                raise CodecError("request send time cannot be the sentinel")
            return ProbeRequest(
                round_no,
                f1,
                None if f2 == SENTINEL else f2,
                None if f3 == SENTINEL else f3,
            )
        if mtype == RESPONSE_TYPE:
            if SENTINEL in (f1, f2, f3):
                raise CodecError("response fields cannot be the sentinel")
            return ProbeResponse(round_no, f1, f2, f3)
    except ValueError as exc:
        raise CodecError(f"invalid message fields: {exc}") from exc
    raise CodecError(f"unknown message type 0x{mtype:02x}")

"""Emulated control chain: host frames -> microcontroller -> 7 x 16-channel DACs.

Wire format of one frame (all multi-octet fields big-endian)::

    offset  size  field
    0       1     opcode      0x01 SET_ONE, 0x02 SET_ALL, 0x03 READBACK
    1       1     length      payload length in octets, multiple of 3
    2       n     payload     entries of 3 octets:
                                octet 0  address = dac_id << 4 | channel
                                octet 1  code bits 15..8
                                octet 2  code bits 7..0
    2+n     2     checksum    (~sum(octets 0 .. 1+n)) & 0xFFFF

SET_ONE carries exactly one entry, SET_ALL and READBACK 1..85 entries.
READBACK entries carry code 0 on the way in; the reply carries the codes
currently held by the bank.

Capture files hold a sequence of frames::

    b"RISCAP" + version octet (1), then per frame a 2-octet length + frame.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FrameRejectedError, RangeError, ValidationError
from .mapping import VoltagePlan, decode_code

log = logging.getLogger(__name__)

N_DACS = 7
CHANNELS_PER_DAC = 16
GRID_ROWS = 10
GRID_COLS = 10
POPULATED = GRID_ROWS * GRID_COLS
MAX_ENTRIES = 85  # 255 // 3
CAPTURE_MAGIC = b"RISCAP"
CAPTURE_VERSION = 1


class Opcode(enum.IntEnum):
    SET_ONE = 0x01
    SET_ALL = 0x02
    READBACK = 0x03


@dataclass(frozen=True, order=True)
class ChannelAddress:
    dac_id: int
    channel: int

    def __post_init__(self):
        if not 0 <= self.dac_id < N_DACS:
            raise RangeError(f"dac_id {self.dac_id} outside 0..{N_DACS - 1}")
        if not 0 <= self.channel < CHANNELS_PER_DAC:
            raise RangeError(f"channel {self.channel} outside 0..{CHANNELS_PER_DAC - 1}")

    @property
    def linear(self) -> int:
        return self.dac_id * CHANNELS_PER_DAC + self.channel

    @property
    def populated(self) -> bool:
        return self.linear < POPULATED

    def to_octet(self) -> int:
        return self.dac_id << 4 | self.channel

    @classmethod
    def from_octet(cls, octet: int) -> ChannelAddress:
        return cls(octet >> 4, octet & 0x0F)


def channel_map(cell, dims: tuple[int, int] = (GRID_ROWS, GRID_COLS)) -> ChannelAddress:
    """DAC channel driving ``cell = (row, col)``: linear index row*cols + col."""
    rows, cols = dims
    if rows * cols > N_DACS * CHANNELS_PER_DAC:
        raise RangeError(f"{rows}x{cols} layout exceeds {N_DACS * CHANNELS_PER_DAC} DAC channels")
    row, col = cell
    if not (0 <= row < rows and 0 <= col < cols):
        raise RangeError(f"cell {cell} outside {rows}x{cols} layout")
    i = row * cols + col
    return ChannelAddress(i // CHANNELS_PER_DAC, i % CHANNELS_PER_DAC)


def checksum(octets: bytes) -> int:
    return ~sum(octets) & 0xFFFF


@dataclass(frozen=True)
class ControlFrame:
    opcode: Opcode
    payload: tuple[tuple[ChannelAddress, int], ...]
    checksum: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "opcode", Opcode(self.opcode))
        object.__setattr__(self, "payload", tuple((a, int(c)) for a, c in self.payload))
        n = len(self.payload)
        if self.opcode is Opcode.SET_ONE and n != 1:
            raise ValidationError("SET_ONE carries exactly one entry")
        if not 1 <= n <= MAX_ENTRIES:
            raise ValidationError(f"frame carries {n} entries, allowed 1..{MAX_ENTRIES}")
        for _, code in self.payload:
            if not 0 <= code <= 0xFFFF:
                raise ValidationError(f"code {code} is not a 16-bit value")
        if self.checksum is None:
            object.__setattr__(self, "checksum", checksum(self._body()))

    def _body(self) -> bytes:
        out = bytearray([int(self.opcode), 3 * len(self.payload)])
        for addr, code in self.payload:
            out += bytes([addr.to_octet(), code >> 8, code & 0xFF])
        return bytes(out)

    @property
    def valid(self) -> bool:
        return self.checksum == checksum(self._body())

    def to_bytes(self) -> bytes:
        return self._body() + struct.pack(">H", self.checksum)


def decode_frame(data: bytes) -> ControlFrame:
    """Parse one frame, verifying length and checksum."""
    if len(data) < 4:
        raise FrameRejectedError(f"frame too short ({len(data)} octets)")
    try:
        opcode = Opcode(data[0])
    except ValueError as exc:
        raise FrameRejectedError(f"unknown opcode 0x{data[0]:02x}") from exc
    n = data[1]
    if n % 3 or len(data) != n + 4:
        raise FrameRejectedError(f"length field {n} inconsistent with frame size {len(data)}")
    (received,) = struct.unpack(">H", data[-2:])
    if received != checksum(data[:-2]):
        raise FrameRejectedError(f"checksum mismatch: got 0x{received:04x}, expected 0x{checksum(data[:-2]):04x}")
    entries = []
    for k in range(2, 2 + n, 3):
        try:
            addr = ChannelAddress.from_octet(data[k])
        except RangeError as exc:
            raise FrameRejectedError(str(exc)) from exc
        entries.append((addr, data[k + 1] << 8 | data[k + 2]))
    try:
        return ControlFrame(opcode, tuple(entries), received)
    except ValidationError as exc:
        raise FrameRejectedError(str(exc)) from exc


@dataclass(frozen=True)
class DacBankState:
    """Codes and dirty flags of the 7 x 16 DAC channels.

    ``ignored_writes`` counts writes to unpopulated channels; it is a
    diagnostic and does not take part in equality.
    """

    codes: np.ndarray = field(default_factory=lambda: np.zeros((N_DACS, CHANNELS_PER_DAC), dtype=np.int64))
    dirty: np.ndarray = field(default_factory=lambda: np.zeros((N_DACS, CHANNELS_PER_DAC), dtype=bool))
    ignored_writes: int = field(default=0, compare=False)

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64)
        dirty = np.array(self.dirty, dtype=bool)
        if codes.shape != (N_DACS, CHANNELS_PER_DAC) or dirty.shape != codes.shape:
            raise ValidationError("DAC bank state must be 7 x 16")
        if np.any(codes < 0) or np.any(codes > 0xFFFF):
            raise ValidationError("DAC codes must lie in [0, 65535]")
        codes.setflags(write=False)
        dirty.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "dirty", dirty)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DacBankState):
            return NotImplemented
        return np.array_equal(self.codes, other.codes) and np.array_equal(self.dirty, other.dirty)

    def code(self, address: ChannelAddress) -> int:
        return int(self.codes[address.dac_id, address.channel])

    def clear_dirty(self) -> DacBankState:
        return dataclasses.replace(self, dirty=np.zeros_like(self.dirty))

    @property
    def populated_count(self) -> int:
        return POPULATED


def _apply_one(frame: ControlFrame, codes: np.ndarray, dirty: np.ndarray) -> int:
    if frame.opcode is Opcode.READBACK:
        return 0
    ignored = 0
    for addr, code in frame.payload:
        if not addr.populated:
            ignored += 1
            log.warning("write to unpopulated channel dac %d ch %d ignored", addr.dac_id, addr.channel)
            continue
        if codes[addr.dac_id, addr.channel] != code:
            codes[addr.dac_id, addr.channel] = code
            dirty[addr.dac_id, addr.channel] = True
    return ignored


def apply_frames(frames: Iterable[ControlFrame | bytes], state: DacBankState) -> DacBankState:
    """Return the bank state after executing ``frames`` in order.

    The input state is never modified. A frame failing its checksum raises
    :class:`FrameRejectedError`; no part of that frame takes effect.
    """
    codes = np.array(state.codes)
    dirty = np.array(state.dirty)
    ignored = state.ignored_writes
    for k, frame in enumerate(frames):
        try:
            if isinstance(frame, (bytes, bytearray)):
                frame = decode_frame(bytes(frame))
            elif not frame.valid:
                raise FrameRejectedError(f"checksum mismatch in {frame.opcode.name} frame")
        except FrameRejectedError as exc:
            raise FrameRejectedError(
                f"frame {k} rejected: {exc}", index=k, applied_state=DacBankState(codes, dirty, ignored)
            ) from exc
        ignored += _apply_one(frame, codes, dirty)
    return DacBankState(codes, dirty, ignored)


def readback(request: ControlFrame, state: DacBankState) -> ControlFrame:
    """Reply to a READBACK request with the codes currently held."""
    if request.opcode is not Opcode.READBACK:
        raise ValidationError("readback() needs a READBACK frame")
    if not request.valid:
        raise FrameRejectedError("checksum mismatch in READBACK frame")
    return ControlFrame(Opcode.READBACK, tuple((a, state.code(a)) for a, _ in request.payload))


def encode_plan(plan: VoltagePlan) -> list[ControlFrame]:
    """One SET_ALL frame per DAC, cells in row-major order."""
    if plan.shape != (GRID_ROWS, GRID_COLS):
        raise ValidationError(f"plan must be {GRID_ROWS}x{GRID_COLS}, got {plan.shape}")
    entries = []
    for r in range(plan.rows):
        for c in range(plan.cols):
            code = int(plan.dac_codes[r, c])
            if not 0 <= code <= 0xFFFF:
                raise ValidationError(f"cell ({r}, {c}) has invalid DAC code {code}")
            entries.append((channel_map((r, c)), code))
    frames = []
    for dac in range(N_DACS):
        chunk = [e for e in entries if e[0].dac_id == dac]
        if chunk:
            frames.append(ControlFrame(Opcode.SET_ALL, tuple(chunk)))
    return frames


def readback_request(dims: tuple[int, int] = (GRID_ROWS, GRID_COLS)) -> list[ControlFrame]:
    addrs = [channel_map((r, c), dims) for r in range(dims[0]) for c in range(dims[1])]
    frames = []
    for start in range(0, len(addrs), CHANNELS_PER_DAC):
        frames.append(ControlFrame(Opcode.READBACK, tuple((a, 0) for a in addrs[start : start + CHANNELS_PER_DAC])))
    return frames


def read_codes(state: DacBankState, dims: tuple[int, int] = (GRID_ROWS, GRID_COLS)) -> np.ndarray:
    """Per-cell DAC codes via READBACK round trips."""
    out = np.zeros(dims, dtype=np.int64)
    for req in readback_request(dims):
        reply = decode_frame(readback(req, state).to_bytes())
        for addr, code in reply.payload:
            out[divmod(addr.linear, dims[1])] = code
    return out


def read_voltages(state: DacBankState, dims: tuple[int, int] = (GRID_ROWS, GRID_COLS)) -> np.ndarray:
    codes = read_codes(state, dims)
    return np.vectorize(decode_code, otypes=[float])(codes)


def write_capture(path, frames: Sequence[ControlFrame | bytes]) -> None:
    out = bytearray(CAPTURE_MAGIC + bytes([CAPTURE_VERSION]))
    for frame in frames:
        raw = frame if isinstance(frame, (bytes, bytearray)) else frame.to_bytes()
        out += struct.pack(">H", len(raw)) + raw
    Path(path).write_bytes(bytes(out))


def read_capture(path) -> list[bytes]:
    """Raw frames from a capture file; decode them with :func:`decode_frame`."""
    data = Path(path).read_bytes()
    head = len(CAPTURE_MAGIC) + 1
    if data[: len(CAPTURE_MAGIC)] != CAPTURE_MAGIC or len(data) < head:
        raise ValidationError(f"{path}: not a capture file")
    if data[len(CAPTURE_MAGIC)] != CAPTURE_VERSION:
        raise ValidationError(f"{path}: unsupported capture version {data[len(CAPTURE_MAGIC)]}")
    frames, pos = [], head
    while pos < len(data):
        if pos + 2 > len(data):
            raise ValidationError(f"{path}: truncated length prefix at offset {pos}")
        (n,) = struct.unpack(">H", data[pos : pos + 2])
        pos += 2
        if pos + n > len(data):
            raise ValidationError(f"{path}: truncated frame at offset {pos}")
        frames.append(data[pos : pos + n])
        pos += n
    return frames

"""Frame bookkeeping shared by the MAC and the routing protocols."""
from __future__ import annotations

from dataclasses import dataclass

BROADCAST = 0xFFFFFFFF


@dataclass(frozen=True)
class Stack:
    """Header lengths in bytes for each layer of a data-bearing frame."""

    app_payload: int = 32
    udp: int = 8
    ip: int = 20
    adhop: int = 20
    mac: int = 22
    max_frame: int = 102
    ack: int = 5
    aodv_control: int = 24

    def adhop_data(self, payload: int) -> int:
        return payload + self.udp + self.ip + self.adhop + self.mac

    def adhop_control(self) -> int:
        # backward ants carry no application payload and no transport header
        return self.ip + self.adhop + self.mac

    def aodv_data(self, payload: int) -> int:
        return payload + self.udp + self.ip + self.mac

    def aodv_ctrl(self) -> int:
        return self.aodv_control + self.udp + self.ip + self.mac

    def max_payload(self) -> int:
        return self.max_frame - (self.udp + self.ip + self.adhop + self.mac)


@dataclass(slots=True)
class Frame:
    """One MAC frame. ``msg`` identifies the application message a data frame carries.

    ``path_bytes``/``path_payload`` accumulate the bytes of the successful
    hops that brought this copy of the message here, including this hop.
    ``came_from`` is simulator-side metadata (the hop the content arrived
    from at the transmitting node) and is not part of the wire format.
    """

    body: object
    size: int
    dst: int = BROADCAST
    payload: int = 0
    msg: tuple[int, int] | None = None
    path_bytes: int = 0
    path_payload: int = 0
    came_from: int | None = None

    @property
    def is_data(self) -> bool:
        return self.msg is not None

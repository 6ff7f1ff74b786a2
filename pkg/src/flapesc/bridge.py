"""Websocket bridge between a live simulation and operator consoles.

One asyncio task steps the engine (wall-clock paced in live mode); one sender
task per client drains a bounded drop-oldest queue so a stalled client never
slows the simulation.  All messages are single JSON text records with a
`type` field; unknown or malformed input is answered with an `error` record,
never a disconnect.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
from collections import deque
from typing import Optional

from .engine import LiveCommand, SimConfig, Simulation, TelemetryFrame
from .errors import DivergenceError

log = logging.getLogger(__name__)

DEFAULT_RATE_HZ = 50.0
CLIENT_QUEUE_MAX = 256

CLIENT_COMMANDS = ("set_source", "pause", "resume", "reset")


def frame_message(frame: TelemetryFrame) -> dict:
    return {"type": "frame", "t": frame.t, "z": frame.z, "J": frame.J,
            "m": frame.m, "z_src": frame.z_src}


def status_message(running: bool, scenario: str) -> dict:
    return {"type": "status", "running": running, "scenario": scenario}


def error_message(reason: str) -> dict:
    return {"type": "error", "reason": reason}


def decode_command(raw: str):
    """Parse one client text record.  Returns (message dict, None) on success
    or (None, reason) on any validation failure."""
    try:
        msg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None, "malformed JSON"
    if not isinstance(msg, dict) or "type" not in msg:
        return None, "message must be an object with a 'type' field"
    kind = msg["type"]
    if kind not in CLIENT_COMMANDS:
        return None, f"unknown message type '{kind}'"
    if kind == "set_source":
        z = msg.get("z")
        if not isinstance(z, (int, float)) or isinstance(z, bool) \
                or not math.isfinite(float(z)):
            return None, "set_source requires a finite numeric 'z' (mm)"
    return msg, None


class _Client:
    """Per-connection fan-out state: bounded drop-oldest frame queue."""

    def __init__(self, ws):
        self.ws = ws
        self.queue: deque = deque(maxlen=CLIENT_QUEUE_MAX)
        self.wakeup = asyncio.Event()

    def push(self, text: str) -> None:
        self.queue.append(text)  # deque(maxlen=...) drops the oldest
        self.wakeup.set()


class Bridge:
    def __init__(self, config: SimConfig, rate_hz: float = DEFAULT_RATE_HZ,
                 paced: bool = True):
        self.sim = Simulation(config)
        self.config = config
        self.rate_hz = rate_hz
        self.paced = paced
        self.paused = False
        self.clients: set[_Client] = set()
        self._stop = asyncio.Event()
        # steps per broadcast; at least 1
        self._batch = max(1, int(round(1.0 / (rate_hz * config.dt))))

    # -- fan-out ---------------------------------------------------------------

    def broadcast(self, msg: dict) -> None:
        text = json.dumps(msg)
        for client in self.clients:
            client.push(text)

    async def _sender(self, client: _Client) -> None:
        while True:
            while not client.queue:
                client.wakeup.clear()
                await client.wakeup.wait()
            await client.ws.send(client.queue.popleft())

    # -- engine loop -------------------------------------------------------------

    async def run(self) -> None:
        """Step the simulation to completion, broadcasting one frame per
        batch.  Paced mode sleeps so sim time tracks wall time."""
        loop = asyncio.get_running_loop()
        anchor_wall = loop.time()
        anchor_sim = self.sim.t
        self.broadcast(status_message(True, self.config.name))
        try:
            while not self.sim.done and not self._stop.is_set():
                if self.paused:
                    await asyncio.sleep(0.02)
                    anchor_wall = loop.time()
                    anchor_sim = self.sim.t
                    continue
                frame = None
                for _ in range(self._batch):
                    if self.sim.done:
                        break
                    frame = self.sim.step()
                if frame is not None:
                    self.broadcast(frame_message(frame))
                if self.paced:
                    target = anchor_wall + (self.sim.t - anchor_sim)
                    delay = target - loop.time()
                    if delay > 0:
                        await asyncio.sleep(delay)
                    else:
                        await asyncio.sleep(0)
                else:
                    await asyncio.sleep(0)
        except DivergenceError as e:
            self.broadcast(error_message(str(e)))
            raise
        finally:
            self.broadcast(status_message(False, self.config.name))

    def stop(self) -> None:
        self._stop.set()

    # -- client protocol -----------------------------------------------------------

    def handle_command(self, msg: dict) -> dict:
        """Apply one validated client command; returns the reply record."""
        kind = msg["type"]
        if kind == "set_source":
            if self.config.objective.kind != "light_field":
                return error_message("set_source requires a light_field objective")
            self.sim.commands.push(LiveCommand(t=self.sim.t, kind="set_source",
                                               value=float(msg["z"])))
            return status_message(not self.paused, self.config.name)
        if kind == "pause":
            self.paused = True  # duplicate pause is a no-op
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            self.sim.commands.push(LiveCommand(t=self.sim.t, kind="reset"))
        return status_message(not self.paused, self.config.name)

    async def handler(self, ws) -> None:
        client = _Client(ws)
        self.clients.add(client)
        client.push(json.dumps(status_message(not self.paused, self.config.name)))
        sender = asyncio.ensure_future(self._sender(client))
        try:
            async for raw in ws:
                msg, reason = decode_command(raw)
                if msg is None:
                    client.push(json.dumps(error_message(reason)))
                    continue
                client.push(json.dumps(self.handle_command(msg)))
        finally:
            self.clients.discard(client)
            sender.cancel()


async def serve(config: SimConfig, host: str = "127.0.0.1", port: int = 8765,
                rate_hz: float = DEFAULT_RATE_HZ, paced: bool = True,
                ready: Optional[asyncio.Event] = None) -> Simulation:
    """Serve one simulation until it finishes or the bridge is stopped.
    Returns the Simulation so callers can flush its log."""
    import websockets.asyncio.server as ws_server

    bridge = Bridge(config, rate_hz=rate_hz, paced=paced)
    async with ws_server.serve(bridge.handler, host, port) as server:
        bridge.server = server
        if ready is not None:
            ready.set()
        await bridge.run()
    return bridge.sim


def serve_forever(config: SimConfig, host: str = "127.0.0.1", port: int = 8765,
                  rate_hz: float = DEFAULT_RATE_HZ,
                  out: Optional[str] = None) -> None:
    """Blocking entry point for the CLI; flushes the full log on exit,
    including on interrupt."""
    from . import telemetry_io

    bridge = Bridge(config, rate_hz=rate_hz, paced=True)

    async def _main():
        import websockets.asyncio.server as ws_server
        async with ws_server.serve(bridge.handler, host, port):
            log.info("serving %s on ws://%s:%d", config.name, host, port)
            await bridge.run()

    try:
        asyncio.run(_main())
    except KeyboardInterrupt:
        pass
    finally:
        if out:
            telemetry_io.write_log(out, bridge.sim.log)
            log.info("telemetry flushed to %s (%d frames)", out,
                     len(bridge.sim.log))

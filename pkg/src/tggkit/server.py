"""Debug server: one engine session per connection, driven over a socket.

Framing is newline-delimited JSON.  A connection that opens with an HTTP
``GET`` is upgraded to a WebSocket (RFC 6455) carrying the same lines as
text messages; anything else is treated as a plain TCP stream.  Requests
are ``{"id": n, "type": t, "params": {...}}``; every request gets exactly
one ``{"id", "ok", "body"|"error"}`` response, and state-changing
commands additionally broadcast one ``{"event": "dataPackage", ...}``.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
from typing import Awaitable, Callable

from . import documents
from .engine import Breakpoint, BreakpointKind, DataPackage, RuleApplication, Session
from .errors import ArgumentError, DocumentError, NoMatchError, StaleMatchError, ValidationError
from .graph import TripleGraph
from .matching import Match
from .rules import Grammar, OperationKind
from .views import (
    DisplayOptions,
    ViewModel,
    build_match_view,
    build_protocol_view,
    build_rule_view,
    render_diagram,
)

PROTOCOL_VERSION = "1"

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


# ---------------------------------------------------------------------------
# Wire payload helpers
# ---------------------------------------------------------------------------


def _match_payload(match: Match) -> dict:
    return {
        "matchId": match.match_id,
        "rule": match.rule_name,
        "kind": match.kind.value,
        "mapping": {k: match.mapping[k] for k in sorted(match.mapping)},
    }


def _application_wire(app: RuleApplication) -> dict:
    payload = documents._application_payload(app)
    payload["stepIndex"] = app.step_index
    return payload


def _package_payload(package: DataPackage) -> dict:
    return {
        "lastApplication": _application_wire(package.last_application) if package.last_application else None,
        "statuses": [
            {
                "rule": s.rule_name,
                "currentMatchCount": s.current_match_count,
                "appliedCount": s.applied_count,
                "everApplicable": s.ever_applicable,
            }
            for s in package.statuses
        ],
        "availableMatches": {
            name: [_match_payload(m) for m in matches]
            for name, matches in sorted(package.available_matches.items())
        },
        "protocolLength": package.protocol_length,
        "mode": package.mode.value,
        "haltReason": package.halt_reason.value if package.halt_reason else None,
        "warnings": list(package.warnings),
    }


def _view_payload(view: ViewModel) -> dict:
    return {
        "nodes": [
            {"id": n.id, "label": n.label, "domain": n.domain.value, "emphasis": n.emphasis.value}
            for n in view.nodes
        ],
        "edges": [
            {
                "id": e.id,
                "source": e.source,
                "target": e.target,
                "label": e.label,
                "domain": e.domain.value,
                "emphasis": e.emphasis.value,
            }
            for e in view.edges
        ],
        "corrs": [
            {
                "id": c.id,
                "source": c.source,
                "target": c.target,
                "label": c.label,
                "emphasis": c.emphasis.value,
            }
            for c in view.corrs
        ],
        "matchLinks": [
            {"ruleElement": l.rule_element, "hostElement": l.host_element} for l in view.match_links
        ],
    }


def _diagram_body(view: ViewModel) -> dict:
    return {
        "viewModel": _view_payload(view),
        "puml": render_diagram(view, "puml"),
        "dot": render_diagram(view, "dot"),
    }


def _breakpoint_payload(bp: Breakpoint) -> dict:
    entry: dict = {"kind": bp.kind.value}
    if bp.rule is not None:
        entry["rule"] = bp.rule
    if bp.count is not None:
        entry["count"] = bp.count
    entry["enabled"] = bp.enabled
    return entry


def _error_response(request_id, code: str, message: str) -> dict:
    return {"id": request_id, "ok": False, "error": {"code": code, "message": message}}


class _Params:
    """Wire parameter bag with error messages that name the field."""

    def __init__(self, raw: dict):
        self._raw = raw

    def opt(self, name, default=None):
        return self._raw.get(name, default)

    def require(self, name):
        if name not in self._raw:
            raise ArgumentError(f"missing required parameter {name!r}")
        return self._raw[name]

    def string(self, name) -> str:
        value = self.require(name)
        if not isinstance(value, str):
            raise ArgumentError(f"parameter {name!r} must be a string")
        return value

    def integer(self, name) -> int:
        value = self.require(name)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ArgumentError(f"parameter {name!r} must be an integer")
        return value


# ---------------------------------------------------------------------------
# Session host: transport-independent request dispatch
# ---------------------------------------------------------------------------


class SessionHost:
    """Owns one session and maps wire requests to engine calls.

    Purely synchronous: :meth:`dispatch` takes a decoded request and
    returns the response plus any events to broadcast after it.  The
    transport layer guarantees requests are processed one at a time.
    """

    def __init__(self, grammar: Grammar, kind: OperationKind, input_triple: TripleGraph, seed: int):
        self.grammar = grammar
        self.session = Session.create(grammar, kind, input_triple.copy(), seed)

    def dispatch(self, request) -> tuple[dict, list[dict]]:
        if not isinstance(request, dict):
            return _error_response(None, "PARSE", "request must be a JSON object"), []
        request_id = request.get("id")
        if not isinstance(request_id, int) or isinstance(request_id, bool):
            return _error_response(None, "PARSE", "request 'id' must be an integer"), []
        rtype = request.get("type")
        if not isinstance(rtype, str):
            return _error_response(request_id, "PARSE", "request 'type' must be a string"), []
        raw_params = request.get("params", {})
        if not isinstance(raw_params, dict):
            return _error_response(request_id, "PARSE", "request 'params' must be an object"), []

        handler = _HANDLERS.get(rtype)
        if handler is None:
            return _error_response(request_id, "ARGUMENT", f"unknown request type {rtype!r}"), []

        events: list[dict] = []
        try:
            body = handler(self, _Params(raw_params), events)
        except StaleMatchError as exc:
            return _error_response(request_id, "STALE_MATCH", str(exc)), []
        except NoMatchError as exc:
            return _error_response(request_id, "NO_MATCH", str(exc)), []
        except ValidationError as exc:
            return _error_response(request_id, "VALIDATION", str(exc)), []
        except DocumentError as exc:
            return _error_response(request_id, exc.code, str(exc)), []
        except ArgumentError as exc:
            return _error_response(request_id, "ARGUMENT", str(exc)), []
        return {"id": request_id, "ok": True, "body": body}, events

    # -- request handlers ------------------------------------------------------

    def _hello(self, params: _Params, events) -> dict:
        return {
            "protocolVersion": PROTOCOL_VERSION,
            "operation": self.session.kind.value,
            "ruleNames": list(self.grammar.rule_names),
        }

    def _overview(self, params: _Params, events) -> dict:
        return _package_payload(self.session.package())

    def _matches(self, params: _Params, events) -> dict:
        rule = params.string("rule")
        package = self.session.package()
        if rule not in package.available_matches:
            raise ArgumentError(f"unknown rule {rule!r}")
        return {"rule": rule, "matches": [_match_payload(m) for m in package.available_matches[rule]]}

    def _apply(self, params: _Params, events) -> dict:
        package = self.session.apply_match(params.string("matchId"))
        body = _package_payload(package)
        events.append({"event": "dataPackage", "body": body})
        return body

    def _apply_random(self, params: _Params, events) -> dict:
        rule = params.opt("rule")
        if rule is not None and not isinstance(rule, str):
            raise ArgumentError("parameter 'rule' must be a string")
        package = self.session.apply_random_match(rule)
        body = _package_payload(package)
        events.append({"event": "dataPackage", "body": body})
        return body

    def _resume(self, params: _Params, events) -> dict:
        package = self.session.run_background(params.integer("maxSteps"))
        body = _package_payload(package)
        events.append({"event": "dataPackage", "body": body})
        return body

    def _parse_breakpoint(self, params: _Params) -> Breakpoint:
        raw_kind = params.string("kind")
        try:
            kind = BreakpointKind(raw_kind)
        except ValueError:
            raise ArgumentError(f"unknown breakpoint kind {raw_kind!r}") from None
        rule = params.opt("rule")
        if rule is not None and not isinstance(rule, str):
            raise ArgumentError("parameter 'rule' must be a string")
        count = params.opt("n")
        if count is not None and (not isinstance(count, int) or isinstance(count, bool)):
            raise ArgumentError("parameter 'n' must be an integer")
        return Breakpoint(kind=kind, rule=rule, count=count)

    def _breakpoint_set(self, params: _Params, events) -> dict:
        self.session.set_breakpoint(self._parse_breakpoint(params))
        return {"breakpoints": [_breakpoint_payload(bp) for bp in self.session.breakpoints]}

    def _breakpoint_clear(self, params: _Params, events) -> dict:
        self.session.clear_breakpoint(self._parse_breakpoint(params))
        return {"breakpoints": [_breakpoint_payload(bp) for bp in self.session.breakpoints]}

    def _protocol(self, params: _Params, events) -> dict:
        return {
            "kind": self.session.kind.value,
            "applications": [_application_wire(app) for app in self.session.protocol],
        }

    def _options(self, params: _Params) -> DisplayOptions:
        raw = params.opt("options")
        if raw is None:
            return DisplayOptions()
        if not isinstance(raw, dict):
            raise ArgumentError("parameter 'options' must be an object")
        return DisplayOptions.from_dict(raw)

    def _state(self, params: _Params, events) -> dict:
        select = params.require("select")
        if not isinstance(select, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) for k in select
        ):
            raise ArgumentError("parameter 'select' must be a list of integers")
        view = build_protocol_view(
            self.grammar,
            self.session.kind,
            self.session.initial_triple,
            self.session.protocol,
            select,
            self._options(params),
        )
        return _diagram_body(view)

    def _rule_diagram(self, params: _Params, events) -> dict:
        name = params.string("rule")
        try:
            rule = self.grammar.rule(name)
        except KeyError:
            raise ArgumentError(f"unknown rule {name!r}") from None
        return _diagram_body(build_rule_view(rule, self._options(params)))

    def _match_diagram(self, params: _Params, events) -> dict:
        match_id = params.string("matchId")
        found = None
        for matches in self.session.package().available_matches.values():
            for match in matches:
                if match.match_id == match_id:
                    found = match
                    break
        if found is None:
            raise StaleMatchError(f"match {match_id!r} is not available in the current state")
        rule = self.grammar.rule(found.rule_name)
        view = build_match_view(found, rule, self.session.triple, self._options(params))
        return _diagram_body(view)

    def _snapshot_save(self, params: _Params, events) -> dict:
        return {"document": json.loads(self.session.save_snapshot())}

    def _snapshot_load(self, params: _Params, events) -> dict:
        document = params.require("document")
        if isinstance(document, (dict, list)):
            document = json.dumps(document)
        if not isinstance(document, str):
            raise ArgumentError("parameter 'document' must be an object or a JSON string")
        self.session = Session.load_snapshot(document)
        body = _package_payload(self.session.package())
        events.append({"event": "dataPackage", "body": body})
        return body

    def _options_validate(self, params: _Params, events) -> dict:
        raw = params.require("options")
        if not isinstance(raw, dict):
            raise ArgumentError("parameter 'options' must be an object")
        return {"options": DisplayOptions.from_dict(raw).to_dict()}


_HANDLERS: dict[str, Callable] = {
    "hello": SessionHost._hello,
    "overview": SessionHost._overview,
    "matches": SessionHost._matches,
    "apply": SessionHost._apply,
    "applyRandom": SessionHost._apply_random,
    "resume": SessionHost._resume,
    "breakpoint.set": SessionHost._breakpoint_set,
    "breakpoint.clear": SessionHost._breakpoint_clear,
    "protocol": SessionHost._protocol,
    "state": SessionHost._state,
    "ruleDiagram": SessionHost._rule_diagram,
    "matchDiagram": SessionHost._match_diagram,
    "snapshot.save": SessionHost._snapshot_save,
    "snapshot.load": SessionHost._snapshot_load,
    "options.validate": SessionHost._options_validate,
}


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------


def _encode_line(message: dict) -> bytes:
    return (json.dumps(message, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


async def _process_line(host: SessionHost, line: str, send: Callable[[dict], Awaitable[None]]) -> None:
    line = line.strip()
    if not line:
        return
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        await send(_error_response(None, "PARSE", f"invalid JSON: {exc.msg}"))
        return
    response, events = host.dispatch(request)
    await send(response)
    for event in events:
        await send(event)


class _FrameReader:
    """Byte reader over an initial buffer plus a stream, with exact reads."""

    def __init__(self, initial: bytes, reader: asyncio.StreamReader):
        self._buffer = bytearray(initial)
        self._reader = reader

    async def exactly(self, n: int) -> bytes:
        while len(self._buffer) < n:
            chunk = await self._reader.read(65536)
            if not chunk:
                raise ConnectionResetError("peer closed mid-frame")
            self._buffer.extend(chunk)
        out = bytes(self._buffer[:n])
        del self._buffer[:n]
        return out


async def _tcp_connection(host: SessionHost, first: bytes, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
    async def send(message: dict) -> None:
        writer.write(_encode_line(message))
        await writer.drain()

    buffer = bytearray(first)
    while True:
        newline = buffer.find(b"\n")
        if newline < 0:
            chunk = await reader.read(65536)
            if not chunk:
                break
            buffer.extend(chunk)
            continue
        line = bytes(buffer[: newline + 1])
        del buffer[: newline + 1]
        await _process_line(host, line.decode("utf-8", errors="replace"), send)


async def _send_ws_frame(writer: asyncio.StreamWriter, opcode: int, payload: bytes) -> None:
    header = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 1 << 16:
        header.append(126)
        header += n.to_bytes(2, "big")
    else:
        header.append(127)
        header += n.to_bytes(8, "big")
    writer.write(bytes(header) + payload)
    await writer.drain()


async def _websocket_connection(
    host: SessionHost, first: bytes, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
) -> None:
    head = bytearray(first)
    while b"\r\n\r\n" not in head:
        chunk = await reader.read(65536)
        if not chunk or len(head) > 1 << 16:
            return
        head.extend(chunk)
    raw_head, _, leftover = bytes(head).partition(b"\r\n\r\n")

    headers: dict[str, str] = {}
    for line in raw_head.decode("latin-1").split("\r\n")[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    key = headers.get("sec-websocket-key")
    if key is None:
        writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\nmissing Sec-WebSocket-Key\r\n")
        await writer.drain()
        return
    accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()).decode("ascii")
    writer.write(
        (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        ).encode("ascii")
    )
    await writer.drain()

    async def send(message: dict) -> None:
        await _send_ws_frame(writer, 0x1, _encode_line(message))

    frames = _FrameReader(leftover, reader)
    message = bytearray()
    message_opcode: int | None = None
    while True:
        try:
            header = await frames.exactly(2)
        except ConnectionResetError:
            return
        fin = header[0] & 0x80
        opcode = header[0] & 0x0F
        masked = header[1] & 0x80
        length = header[1] & 0x7F
        if length == 126:
            length = int.from_bytes(await frames.exactly(2), "big")
        elif length == 127:
            length = int.from_bytes(await frames.exactly(8), "big")
        mask = await frames.exactly(4) if masked else b""
        payload = await frames.exactly(length)
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))

        if opcode == 0x8:  # close: echo and drop
            await _send_ws_frame(writer, 0x8, payload[:2])
            return
        if opcode == 0x9:  # ping
            await _send_ws_frame(writer, 0xA, payload)
            continue
        if opcode == 0xA:  # pong
            continue
        if opcode in (0x1, 0x2):
            message = bytearray(payload)
            message_opcode = opcode
        elif opcode == 0x0:
            message.extend(payload)
        else:
            return  # protocol violation
        if not fin:
            continue
        if message_opcode == 0x1:
            # both newlines and message boundaries delimit requests
            for piece in message.decode("utf-8", errors="replace").split("\n"):
                await _process_line(host, piece, send)
        message = bytearray()
        message_opcode = None


def run_server(
    grammar: Grammar,
    kind: OperationKind,
    input_triple: TripleGraph,
    seed: int,
    port: int,
    ready: Callable[[int], None] | None = None,
) -> None:
    """Serve sessions on 127.0.0.1:``port`` until interrupted.

    Every connection gets a fresh session built from the same arguments.
    ``ready`` (if given) receives the actual bound port once listening.
    """

    async def on_connect(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            host = SessionHost(grammar, kind, input_triple, seed)
            first = await reader.read(4)
            while 0 < len(first) < 4:
                chunk = await reader.read(4 - len(first))
                if not chunk:
                    break
                first += chunk
            if not first:
                return
            if first == b"GET ":
                await _websocket_connection(host, first, reader, writer)
            else:
                await _tcp_connection(host, first, reader, writer)
        except (ConnectionResetError, BrokenPipeError):
            pass
        finally:
            try:
                writer.close()
                await writer.wait_closed()
            except (ConnectionResetError, BrokenPipeError):
                pass

    async def main() -> None:
        server = await asyncio.start_server(on_connect, "127.0.0.1", port)
        bound = server.sockets[0].getsockname()[1]
        print(f"listening on 127.0.0.1:{bound}", flush=True)
        if ready is not None:
            ready(bound)
        async with server:
            await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass

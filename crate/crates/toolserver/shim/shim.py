# Jailed interpreter loop. Frames on fds 3/4: 4-byte big-endian length + JSON.
import gc
import importlib
import io
import json
import os
import struct
import sys
import traceback

REQ = os.fdopen(3, "rb", buffering=0)
RESP = os.fdopen(4, "wb", buffering=0)
LIMIT = int(os.environ.get("RANDCRYPTO_SHIM_OUTPUT", "65536"))
HARD_LIMIT = LIMIT * 16
SITE = os.environ.get("RANDCRYPTO_SHIM_SITE")
if SITE:
    sys.path.insert(0, SITE)

_devnull = os.open(os.devnull, os.O_RDWR)
os.dup2(_devnull, 0)
os.dup2(_devnull, 1)
os.dup2(_devnull, 2)


class OutputFlood(BaseException):
    pass


class Capture(io.TextIOBase):
    def __init__(self):
        self.parts = []
        self.kept = 0
        self.total = 0

    def writable(self):
        return True

    def write(self, s):
        n = len(s)
        self.total += n
        if self.kept < LIMIT + 1:
            piece = s[: LIMIT + 1 - self.kept]
            self.parts.append(piece)
            self.kept += len(piece)
        if self.total > HARD_LIMIT:
            raise OutputFlood()
        return n

    def text(self):
        return "".join(self.parts)


def fresh_namespace():
    return {"__name__": "__main__", "__builtins__": __builtins__}


def read_exact(n):
    buf = b""
    while len(buf) < n:
        chunk = REQ.read(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def send(obj):
    data = json.dumps(obj).encode()
    RESP.write(struct.pack(">I", len(data)) + data)


def run_cell(ns, code):
    cap = Capture()
    out = {"stdout": "", "error": None, "kind": None}
    sys.stdout = sys.stderr = cap
    try:
        importlib.invalidate_caches()
        exec(compile(code, "<cell>", "exec"), ns)
    except MemoryError:
        out["kind"] = "memory"
        out["error"] = "MemoryError: cell exceeded the memory limit"
    except OutputFlood:
        out["kind"] = "output"
        out["error"] = "output limit exceeded; cell aborted"
    except SystemExit as e:
        out["error"] = "SystemExit: %s" % (e.code,)
    except BaseException:
        etype, value, tb = sys.exc_info()
        out["error"] = "".join(traceback.format_exception(etype, value, tb.tb_next)).rstrip()
    finally:
        sys.stdout, sys.stderr = sys.__stdout__, sys.__stderr__
    out["stdout"] = cap.text()
    out["truncated"] = cap.total > LIMIT
    cap = None
    gc.collect()
    return out


def variables(ns):
    return {k: type(v).__name__ for k, v in sorted(ns.items()) if not k.startswith("_")}


def main():
    ns = fresh_namespace()
    send({"ready": True})
    while True:
        head = read_exact(4)
        if head is None:
            return
        body = read_exact(struct.unpack(">I", head)[0])
        if body is None:
            return
        try:
            req = json.loads(body)
            op = req.get("op")
            if op == "exec":
                if req.get("reset"):
                    ns = fresh_namespace()
                    gc.collect()
                send(run_cell(ns, req["code"]))
            elif op == "list_vars":
                send({"vars": variables(ns)})
            elif op == "reset":
                ns = fresh_namespace()
                gc.collect()
                send({"vars": {}})
            else:
                send({"fatal": "unknown op %r" % (op,)})
        except MemoryError:
            gc.collect()
            send({"stdout": "", "error": "MemoryError", "kind": "memory", "truncated": False})


main()

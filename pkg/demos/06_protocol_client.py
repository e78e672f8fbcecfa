"""Driving the simulator over its WebSocket protocol.

Starts an in-process server on a free port, then speaks the same JSON
protocol the browser teleoperation client uses. Everything the Python API
can do is reachable over the wire, and the digests it produces are
byte-identical to an in-process run.
"""

import json

from websockets.sync.client import connect

from flatpack.server import ServerThread

with ServerThread(port=0) as server:
    print(f"server on ws://127.0.0.1:{server.port}")
    with connect(f"ws://127.0.0.1:{server.port}") as ws:
        rid = 0

        def rpc(mtype, **payload):
            global rid
            rid += 1
            ws.send(json.dumps({"type": mtype, "rid": rid, **payload}))
            reply = json.loads(ws.recv())
            if reply["type"] == "error":
                raise RuntimeError(f"{reply['code']}: {reply['message']}")
            return reply["data"]

        hello = rpc("hello")
        print("engine:", hello["engine"], "protocol:", hello["protocol"])
        print("models:", [m["name"] for m in rpc("list_models")["models"]])

        session = rpc("make", config={"model": "block", "max_steps": 100})
        sid = session["session_id"]
        print("session:", sid[:12], "model parts:", len(session["model"]["parts"]))

        obs = rpc("reset", session=sid, seed=3)["obs"]
        print("spawned at:", {p["id"]: [round(v, 2) for v in p["pos"]] for p in obs["parts"]})

        # Nudge cursor 1 along +x for five steps.
        action = [0.0] * 15
        action[7] = 1.0
        for _ in range(5):
            data = rpc("step", session=sid, action=action)
        print("cursor 1 now at:", [round(v, 3) for v in data["obs"]["cursors"][1]["pos"]])

        # Errors are structured, never fatal to the connection.
        try:
            rpc("step", session="not-a-session", action=action)
        except RuntimeError as e:
            print("expected error:", e)

        rpc("close", session=sid)
        print("session closed")

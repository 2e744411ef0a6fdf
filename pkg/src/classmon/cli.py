"""Operator command line.

Subcommands: serve, simulate, train, evaluate, prep-daisee, export.
Global flags --db-path, --model-path, --listen-addr apply to every
subcommand that touches the store, the model, or the network.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .api import AppState, create_app, default_static_dir
from .classifier import EmotionCNN
from .daisee import TAKE_ALL, prepare, read_manifest, load_split, write_manifest
from .errors import DuplicateStudentId, GatewayUnavailable
from .labels import EMOTION_LABELS
from .metrics import evaluate_classifier, format_report
from .simulator import SimScenario, generate_students, make_training_set, run_scenario
from .store import MonitoringStore

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="classmon",
        description="Embedding-based attendance and facial-affect monitoring service",
    )
    p.add_argument("--db-path", default="classmon.db", help="SQLite database file")
    p.add_argument("--model-path", default="classmon_model.npz", help="classifier checkpoint")
    p.add_argument(
        "--listen-addr",
        default=os.environ.get("CLASSMON_LISTEN_ADDR", "127.0.0.1:8000"),
        help="host:port for serve, or the target for simulate --server",
    )
    sub = p.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument(
        "--capture-interval-ms",
        type=int,
        default=int(os.environ.get("CLASSMON_CAPTURE_INTERVAL_MS", "2000")),
        help="expected cadence of edge captures",
    )
    serve.add_argument("--max-batch", type=int, default=32)
    serve.add_argument("--static-dir", default=None, help="dashboard asset directory")

    sim = sub.add_parser("simulate", help="drive a synthetic classroom scenario")
    sim.add_argument("--scenario", required=True, help="scenario JSON file")
    sim.add_argument(
        "--compressed",
        action="store_true",
        help="run ticks back-to-back instead of real time",
    )
    sim.add_argument(
        "--server",
        default=None,
        help="base URL of a running service; omitted runs in-process against --db-path",
    )
    sim.add_argument("--course-label", default="simulated session")
    sim.add_argument("--leave-open", action="store_true", help="do not end the session")

    train = sub.add_parser("train", help="train the affect classifier")
    train.add_argument("--manifest", default=None, help="dataset manifest from prep-daisee")
    train.add_argument(
        "--synthetic",
        type=int,
        default=None,
        metavar="N",
        help="train on N synthetic crops per class instead of a manifest",
    )
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=10)
    train.add_argument("--history-out", default=None, help="write per-epoch stats as CSV")

    ev = sub.add_parser("evaluate", help="evaluate the classifier and print a report")
    ev.add_argument("--manifest", default=None, help="uses the manifest's test split")
    ev.add_argument(
        "--synthetic",
        type=int,
        default=None,
        metavar="N",
        help="evaluate on N held-out synthetic crops per class",
    )
    ev.add_argument("--seed", type=int, default=1)

    prep = sub.add_parser("prep-daisee", help="build a balanced dataset manifest")
    prep.add_argument("--annotations", required=True, help="per-clip annotation CSV")
    prep.add_argument("--frames-root", required=True, help="directory of per-clip frame dirs")
    prep.add_argument("--seed", type=int, default=0)
    prep.add_argument("--out", default="manifest.csv")
    prep.add_argument(
        "--clip-level",
        action="store_true",
        help="split by clip rather than by frame",
    )
    prep.add_argument(
        "--targets",
        default=None,
        help=(
            "per-class clip targets as label=count pairs, e.g. "
            "boredom=40,confusion=40,engagement=40,frustration=all; "
            "unlisted classes are dropped"
        ),
    )

    exp = sub.add_parser("export", help="dump the store as tab-separated text")
    exp.add_argument("--out", default=None, help="output file; stdout when omitted")
    return p


def _split_listen_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep:
        raise SystemExit(f"--listen-addr must be host:port, got {addr!r}")
    return host, int(port)


def cmd_serve(args) -> int:
    import uvicorn

    state = AppState(
        db_path=args.db_path,
        model_path=args.model_path,
        capture_interval_ms=args.capture_interval_ms,
        max_batch=args.max_batch,
    )
    static_dir = args.static_dir or default_static_dir()
    app = create_app(state, static_dir=static_dir)
    host, port = _split_listen_addr(args.listen_addr)
    log.info("serving on %s:%d (db=%s)", host, port, args.db_path)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


class _HttpSubmitter:
    """Pushes wire batches at a running service over HTTP."""

    def __init__(self, base_url: str):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.client = httpx.Client(timeout=30.0)
        self._errors = (httpx.TransportError,)

    def post(self, path: str, payload: dict, ok_statuses: tuple = ()) -> dict:
        try:
            resp = self.client.post(f"{self.base_url}{path}", json=payload)
        except self._errors as exc:
            raise GatewayUnavailable(f"cannot reach {self.base_url}: {exc}") from None
        if resp.status_code >= 400 and resp.status_code not in ok_statuses:
            raise GatewayUnavailable(f"{path} returned {resp.status_code}: {resp.text}")
        return resp.json()

    def submit(self, batch: list) -> list:
        return self.post("/v1/detections", {"detections": batch})["acks"]


def _paced(submit, tick_ms: int):
    """Wrap a submit callable to sleep between ticks (real-time mode)."""
    last_tick = None

    def wrapper(batch):
        nonlocal last_tick
        if batch:
            t = batch[0]["captured_at"]
            if last_tick is not None and t != last_tick:
                time.sleep(tick_ms / 1000.0)
            last_tick = t
        return submit(batch)

    return wrapper


def cmd_simulate(args) -> int:
    scenario = SimScenario.from_file(args.scenario)
    students = generate_students(scenario)

    if args.server:
        http = _HttpSubmitter(args.server)
        for s in students:
            # 409 means the cohort was enrolled by an earlier run; with the
            # same seed the embeddings are identical, so reuse is safe.
            http.post(
                "/v1/students",
                {
                    "student_id": s.student_id,
                    "display_name": s.display_name,
                    "embedding": s.embedding.tolist(),
                },
                ok_statuses=(409,),
            )
        session = http.post("/v1/sessions", {"course_label": args.course_label})
        session_id = session["session_id"]
        submit = http.submit
        end = lambda: http.post(f"/v1/sessions/{session_id}/end", {})
        summarize = lambda: http.client.get(
            f"{http.base_url}/v1/sessions/{session_id}/summary"
        ).json()
    else:
        state = AppState(db_path=args.db_path, model_path=args.model_path)
        for s in students:
            try:
                state.registry.enroll_student(s.student_id, s.display_name, s.embedding)
                state.store.add_student(s.student_id, s.display_name, s.embedding, 0)
            except DuplicateStudentId:
                # Same seed regenerates the same cohort; reuse existing rows.
                pass
        session = state.engine.start_session(args.course_label)
        session_id = session.session_id
        submit = state.gateway.submit_detections
        end = lambda: state.engine.end_session(session_id)
        summarize = lambda: {
            "present_count": state.analytics.session_summary(session_id).present_count,
            "unmatched_count": state.analytics.session_summary(session_id).unmatched_count,
        }

    if not args.compressed:
        submit = _paced(submit, scenario.tick_ms)

    started = time.time()
    truth = run_scenario(scenario, submit, session_id)
    elapsed = time.time() - started
    if not args.leave_open:
        end()
    summary = summarize()
    print(f"session {session_id}: {truth.emitted_count()} detections in {elapsed:.1f}s")
    print(
        f"present {summary.get('present_count')}, "
        f"unmatched {summary.get('unmatched_count')}"
    )
    return 0


def _training_data(args):
    if args.manifest:
        entries = read_manifest(args.manifest)
        X, y = load_split(entries, "train")
        X_val, y_val = load_split(entries, "test")
        return X, y, (X_val if len(y_val) else None), (y_val if len(y_val) else None)
    if args.synthetic:
        X, y = make_training_set(args.synthetic, seed=args.seed)
        X_val, y_val = make_training_set(max(args.synthetic // 4, 8), seed=args.seed + 1)
        return X, y, X_val, y_val
    raise SystemExit("train needs --manifest or --synthetic N")


def cmd_train(args) -> int:
    X, y, X_val, y_val = _training_data(args)
    model = EmotionCNN(epochs=args.epochs, random_state=args.seed)
    print(f"training on {len(y)} images" + (f", validating on {len(y_val)}" if y_val is not None else ""))
    model.fit(X, y, X_val, y_val)
    for st in model.history_:
        val = f"  val_acc {st.val_acc:.4f}" if st.val_acc is not None else ""
        print(f"epoch {st.epoch + 1:2d}  loss {st.train_loss:.4f}  acc {st.train_acc:.4f}{val}")
    model.save(args.model_path)
    print(f"saved checkpoint to {args.model_path}")
    if args.history_out:
        with open(args.history_out, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,train_acc,val_acc\n")
            for st in model.history_:
                val = "" if st.val_acc is None else f"{st.val_acc:.6f}"
                fh.write(f"{st.epoch},{st.train_loss:.6f},{st.train_acc:.6f},{val}\n")
    return 0


def cmd_evaluate(args) -> int:
    model = EmotionCNN.load(args.model_path)
    if args.manifest:
        entries = read_manifest(args.manifest)
        X, y = load_split(entries, "test")
    elif args.synthetic:
        X, y = make_training_set(args.synthetic, seed=args.seed)
    else:
        raise SystemExit("evaluate needs --manifest or --synthetic N")
    if len(y) == 0:
        raise SystemExit("evaluation split is empty")
    report = evaluate_classifier(model, X, y)
    print(format_report(report))
    return 0


def _parse_targets(text: str) -> dict:
    targets = {}
    for part in text.split(","):
        label, sep, value = part.partition("=")
        label = label.strip()
        value = value.strip()
        if not sep or label not in EMOTION_LABELS:
            raise SystemExit(f"bad --targets entry {part!r}")
        try:
            targets[label] = TAKE_ALL if value == TAKE_ALL else int(value)
        except ValueError:
            raise SystemExit(f"bad --targets count {value!r}") from None
    return targets


def cmd_prep_daisee(args) -> int:
    manifest = prepare(
        args.annotations,
        args.frames_root,
        seed=args.seed,
        targets=_parse_targets(args.targets) if args.targets else None,
        clip_level=args.clip_level,
    )
    write_manifest(manifest, args.out)
    splits = manifest.split_counts()
    print(f"clips per class: {json.dumps(manifest.clip_counts)}")
    print(
        f"manifest {args.out}: {len(manifest.entries)} frames "
        f"(train {splits['train']}, test {splits['test']})"
    )
    return 0


def cmd_export(args) -> int:
    store = MonitoringStore(args.db_path)
    try:
        text = store.export_text()
    finally:
        store.close()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "serve": cmd_serve,
    "simulate": cmd_simulate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "prep-daisee": cmd_prep_daisee,
    "export": cmd_export,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

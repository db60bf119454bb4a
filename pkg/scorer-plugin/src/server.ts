/**
 * Stdio serve loop for the similarity scorer.
 *
 * Wire protocol, one JSON message per line, UTF-8:
 *   handshake (out): {"hello": {"name", "version", "range": [0, 1], "map"}}
 *   request   (in):  {"id": int, "candidate": str, "reference": str}
 *   response  (out): {"id": int, "score": float}
 *
 * Responses are emitted in request order. A malformed request line gets an
 * error row carrying the offending id (or -1 when no id is recoverable) and
 * the process keeps serving.
 */

import { createInterface } from "readline";
import { AFFINE_MAP, score } from "./similarity";

const NAME = "scorer-plugin";
const VERSION = "0.1.0";

interface ScoreRequest {
  id: number;
  candidate: string;
  reference: string;
}

function writeLine(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

function parseRequest(line: string): ScoreRequest {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw { id: -1, message: "request line is not valid JSON" };
  }
  const rec = obj as Partial<ScoreRequest>;
  const id = typeof rec.id === "number" && Number.isInteger(rec.id) ? rec.id : -1;
  if (id === -1) {
    throw { id: -1, message: "request lacks an integer id" };
  }
  if (typeof rec.candidate !== "string" || typeof rec.reference !== "string") {
    throw { id, message: "candidate and reference must be strings" };
  }
  return { id, candidate: rec.candidate, reference: rec.reference };
}

export function serve(): void {
  writeLine({
    hello: { name: NAME, version: VERSION, range: [0, 1], map: AFFINE_MAP },
  });
  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line: string) => {
    if (!line.trim()) {
      return;
    }
    let request: ScoreRequest;
    try {
      request = parseRequest(line);
    } catch (err) {
      const { id, message } = err as { id: number; message: string };
      writeLine({ id, error: message });
      return;
    }
    writeLine({ id: request.id, score: score(request.candidate, request.reference) });
  });
}

"""HTTP wiring for the scorer wire protocol.

POST /v1/score
    request:  {"pairs": [{"context": str, "target": str}], "max_total_tokens": int}
    response: {"scores": [{"logprob": float, "target_tokens": int}]}
    optional ?normalize=per_token divides each logprob by its target token count.
GET /v1/health
    response: {"model": str, "ok": true}

Malformed request bodies produce 400, never a 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .scoring import ModelScorer


def _parse_pairs(body: object) -> tuple[list[tuple[str, str]], int | None]:
    if not isinstance(body, dict):
        raise ValueError("request body must be a JSON object")
    raw_pairs = body.get("pairs")
    if not isinstance(raw_pairs, list):
        raise ValueError("'pairs' must be a list")
    pairs = []
    for entry in raw_pairs:
        if (not isinstance(entry, dict)
                or not isinstance(entry.get("context"), str)
                or not isinstance(entry.get("target"), str)):
            raise ValueError("each pair needs string 'context' and 'target'")
        pairs.append((entry["context"], entry["target"]))
    budget = body.get("max_total_tokens")
    if budget is not None and (not isinstance(budget, int) or budget < 2):
        raise ValueError("'max_total_tokens' must be an integer >= 2")
    return pairs, budget


def create_app(scorer: ModelScorer) -> FastAPI:
    app = FastAPI(title="lm-scorer-service")

    @app.get("/v1/health")
    def health():
        return {"model": scorer.model_id, "ok": True}

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "invalid JSON"}, status_code=400)
        try:
            pairs, budget = _parse_pairs(body)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        normalize = request.query_params.get("normalize")
        if normalize not in (None, "per_token"):
            return JSONResponse({"error": "unknown normalize mode"}, status_code=400)
        results = scorer.score_batch(pairs, budget)
        scores = []
        for r in results:
            logprob = r.logprob
            if normalize == "per_token" and r.target_tokens > 0:
                logprob /= r.target_tokens
            scores.append({"logprob": logprob, "target_tokens": r.target_tokens})
        return {"scores": scores}

    return app

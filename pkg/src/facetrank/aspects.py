"""Sub-aspect prediction and parsing.

Aspects travel as bracket-delimited strings ("[history][impact]") between
the explorer model and the rest of the pipeline. Brackets are reserved
characters inside aspect text.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SubAspectList:
    aspects: tuple[str, ...]
    source: str = "predicted"  # predicted | gold | fallback

    def __post_init__(self):
        if not self.aspects:
            raise ValueError("aspect list is empty")
        if any(not a.strip() for a in self.aspects):
            raise ValueError("empty aspect string")


@dataclass(frozen=True)
class ExplorerPrompt:
    template: str = "List the sub-aspects of the question: {query}"

    def __post_init__(self):
        if self.template.count("{query}") != 1:
            raise ValueError("template must contain exactly one {query} placeholder")

    def render(self, query: str) -> str:
        return self.template.format(query=query)


def format_target(aspects: SubAspectList) -> str:
    """Serialize aspects as the explorer's SFT target string."""
    for a in aspects.aspects:
        if "[" in a or "]" in a:
            raise ValueError("aspect contains bracket")
    return "".join(f"[{a}]" for a in aspects.aspects)


def parse_aspects(raw: str) -> SubAspectList:
    """Extract top-level bracketed segments, in order.

    Whitespace inside segments is trimmed and empty segments dropped.
    Text outside brackets is ignored; unbalanced or nested brackets are
    rejected.
    """
    segments = []
    current: list[str] | None = None
    for ch in raw:
        if ch == "[":
            if current is not None:
                raise ValueError("malformed aspect string")
            current = []
        elif ch == "]":
            if current is None:
                raise ValueError("malformed aspect string")
            segments.append("".join(current).strip())
            current = None
        elif current is not None:
            current.append(ch)
    if current is not None:
        raise ValueError("malformed aspect string")
    aspects = tuple(s for s in segments if s)
    if not aspects:
        raise ValueError("no aspects parsed")
    return SubAspectList(aspects, source="predicted")


def predict_aspects(query: str, prompt: ExplorerPrompt, client, max_tokens: int = 256) -> SubAspectList:
    """Ask an LLM client for the query's sub-aspects.

    The client contract is ``complete(prompt: str, max_tokens: int) -> str``.
    One retry on unparseable output, then fall back to the query itself as
    a single aspect.
    """
    rendered = prompt.render(query)
    for _ in range(2):
        completion = client.complete(rendered, max_tokens)
        try:
            return parse_aspects(completion)
        except ValueError:
            continue
    return SubAspectList((query,), source="fallback")


def explorer_sft_loss(token_logprobs: list[float]) -> float:
    """Next-token-prediction loss: negated sum of per-token log-probs."""
    if not token_logprobs:
        raise ValueError("empty log-probability list")
    if any(lp > 0 for lp in token_logprobs):
        raise ValueError("invalid log-probability")
    return -sum(token_logprobs)


@dataclass
class HttpLlmClient:
    """Minimal HTTP completion client: {"prompt", "max_tokens"} -> {"text"}."""

    endpoint: str
    timeout: float = 30.0
    retries: int = 1

    def complete(self, prompt: str, max_tokens: int) -> str:
        import requests

        last_err = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    self.endpoint,
                    json={"prompt": prompt, "max_tokens": max_tokens},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["text"]
            except Exception as err:  # noqa: BLE001 - surfaced to caller below
                last_err = err
        raise RuntimeError(f"LLM client failed: {last_err}") from last_err

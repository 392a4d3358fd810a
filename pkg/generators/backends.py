"""
Code-generation backends: a LangChain chat model, or a mock that replays
fixture responses in order.
"""

import logging
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from langchain_core.messages import BaseMessage
from langchain_core.output_parsers import StrOutputParser

import config

logger = logging.getLogger(__name__)


class BackendError(Exception):
    """The backend could not produce a response"""


class GenBackend(ABC):
    name = "backend"

    @abstractmethod
    def complete(self, messages: Sequence[BaseMessage]) -> str:
        """Send the whole conversation and return the text of the answer"""


class ChatBackend(GenBackend):
    """
    Chat-completions backend built from the provider table in config

    Args:
        provider: key of config.LLM_PROVIDERS (default config.DEFAULT_PROVIDER)
        llm: an already constructed LangChain chat model; overrides provider
        retries: attempts after the first failed one
        backoff: delay before the first retry, doubled after every retry
    """

    def __init__(self, provider: Optional[str] = None, llm=None,
                 retries: int = config.BACKEND_RETRIES, backoff: float = 2.0,
                 sleep: Callable[[float], None] = time.sleep):
        self.provider = provider or config.DEFAULT_PROVIDER
        self.llm = llm if llm is not None else config.get_llm(self.provider)
        self.name = f"http:{self.provider}"
        self.retries = max(0, retries)
        self.backoff = backoff
        self.sleep = sleep
        self.chain = self.llm | StrOutputParser()

    def complete(self, messages: Sequence[BaseMessage]) -> str:
        delay = self.backoff
        for attempt in range(self.retries + 1):
            try:
                return self.chain.invoke(list(messages))
            except Exception as exc:
                if attempt == self.retries:
                    raise BackendError(f"{self.name} failed after {attempt + 1} attempts: {exc}") from exc
                logger.warning("%s failed (%s), retrying in %.1fs", self.name, exc, delay)
                self.sleep(delay)
                delay *= 2
        raise BackendError(f"{self.name} made no attempt")


class MockBackend(GenBackend):
    """
    Replays the *.md files of a fixture directory in name order, one per call;
    the last response repeats once the fixtures run out. Every received
    conversation is kept in `prompts`.
    """

    def __init__(self, directory: str):
        self.directory = Path(directory)
        self.responses = [p.read_text(encoding="utf-8") for p in sorted(self.directory.glob("*.md"))]
        if not self.responses:
            raise ValueError(f"mock backend directory {directory!r} has no *.md responses")
        self.name = f"mock:{self.directory.name}"
        self.prompts: List[List[BaseMessage]] = []

    def complete(self, messages: Sequence[BaseMessage]) -> str:
        index = min(len(self.prompts), len(self.responses) - 1)
        self.prompts.append(list(messages))
        logger.debug("%s answers with response %d", self.name, index + 1)
        return self.responses[index]


def make_backend(descriptor: str) -> GenBackend:
    """`mock:<fixture dir>`, `http` or `http:<provider>`"""
    kind, _, value = descriptor.partition(":")
    if kind == "mock" and value:
        path = Path(value)
        if not path.is_dir() and (Path(config.FIXTURES_DIR) / value).is_dir():
            path = Path(config.FIXTURES_DIR) / value
        return MockBackend(str(path))
    if kind == "http":
        return ChatBackend(value or None)
    raise ValueError(f"backend must be mock:<dir> or http[:<provider>], got {descriptor!r}")

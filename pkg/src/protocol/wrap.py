# src/protocol/wrap.py
from __future__ import annotations

from dataclasses import replace
from typing import Any, Iterator, Optional

from core.errors import ContractViolation
from protocol.base import Action, Machine, Message, Output, Path, Terminate


class IntrusionWrap(Machine):
    """
    Gjør en CA-maskin inntrengningstolerant: utdata y blir ⊥ med mindre y er
    lik partens egen input. Innpakningen er usynlig i instansstien; alt annet
    delegeres til den indre maskinen.
    """

    def __init__(self, inner: Machine):
        if inner.acquired or inner.outputs or inner.terminated:
            raise ContractViolation(f"{inner.name} hos P{inner.index} er allerede brukt og kan ikke pakkes inn")
        super().__init__(inner.ctx)
        self.inner = inner
        self.label = inner.label
        self.waits_for_input = False
        self.bottom_messages = inner.bottom_messages
        self.children = inner.children

    @property
    def name(self) -> str:
        return f"IntrusionWrap({self.inner.name})"

    def acquire(self, value: Any) -> list[Action]:
        if self.acquired:
            raise ContractViolation(f"{self.name} hos P{self.index} fikk input to ganger")
        self.acquired = True
        self.input = value
        return self._filter(self.inner.acquire(value))

    def deliver(self, src: int, path: Path, message: Message) -> list[Action]:
        return self._filter(self.inner.deliver(src, path, message))

    def _filter(self, actions: list[Action]) -> list[Action]:
        out: list[Action] = []
        for action in actions:
            if isinstance(action, Output) and not action.path:
                value = action.value if action.value == self.input else None
                self.outputs.append(value)
                action = replace(action, value=value)
            elif isinstance(action, Terminate) and not action.path:
                self.terminated = True
            out.append(action)
        return out

    def on_input(self, value: Any) -> list[Action]:
        return []

    def on_message(self, src: int, message: Message) -> list[Action]:
        return []

    def matching_message(self, src: int) -> Optional[Message]:
        return self.inner.matching_message(src)

    def walk(self, prefix: Path = ()) -> Iterator[tuple[Path, Machine]]:
        return self.inner.walk(prefix)

    def find(self, path: Path) -> Optional[Machine]:
        return self.inner.find(path)

    def snapshot(self) -> dict[str, Any]:
        return self.inner.snapshot()

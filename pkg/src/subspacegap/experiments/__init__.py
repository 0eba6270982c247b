from __future__ import annotations

from functools import partial
from typing import Any

_registry: dict[str, dict[str, Any]] = {
    "method": {},
    "suite": {},
}


def _registryWrapper(obj, name, kind):
    registry = _registry[kind]
    assert name not in registry
    obj.registeredName = name
    registry[name] = obj
    return obj


def _getRegistered(kind: str, name: str) -> Any:
    obj = _registry[kind].get(name)
    if obj is None:
        raise KeyError(f"No {kind} found named '{name}'")
    return obj


def registerMethod(name):
    return partial(_registryWrapper, name=name, kind="method")


def registerSuite(name):
    return partial(_registryWrapper, name=name, kind="suite")


def getMethodClass(name: str) -> type:
    return _getRegistered("method", name)


def getSuite(name: str):
    return _getRegistered("suite", name)


def registeredNames(kind: str) -> list[str]:
    return sorted(_registry[kind])

"""Installation configuration: where state lives and who the tokens are."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class ServiceConfig:
    store_path: str = "itemgraph-store.json"
    base_url: str = "http://127.0.0.1:8000"
    # bearer token -> acting agent id; requests without a token act anonymously
    tokens: dict[str, int] = field(default_factory=dict)
    admins: list[int] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> "ServiceConfig":
        return cls(
            store_path=data.get("store", cls.store_path),
            base_url=data.get("base_url", cls.base_url),
            tokens={str(k): int(v) for k, v in data.get("tokens", {}).items()},
            admins=[int(a) for a in data.get("admins", [])],
        )

    def to_dict(self) -> dict:
        return {
            "store": self.store_path,
            "base_url": self.base_url,
            "tokens": self.tokens,
            "admins": self.admins,
        }


def load_config(path: str) -> ServiceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ServiceConfig.from_dict(json.load(fh))


def save_config(config: ServiceConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")

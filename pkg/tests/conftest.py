from __future__ import annotations

import pytest

from itemgraph import ContentEngine


@pytest.fixture
def engine() -> ContentEngine:
    return ContentEngine()


@pytest.fixture
def admin(engine: ContentEngine) -> int:
    """First agent of the installation, self-created, with admin rights."""
    agent = engine.create_item(None, "Person", {"first_name": "Mike"}, self_created=True)
    engine.permissions.admin_agents.add(agent.id)
    return agent.id

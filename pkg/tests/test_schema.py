"""Type registry: hierarchy linearization, piece inheritance, schema files.

The linearization and piece-merge logic is checked against brute-force
oracles that recompute the expected answers from the raw parent lists,
independently of the registry's own traversal.
"""

from __future__ import annotations

import random

import pytest

from itemgraph import PieceDefinition, TypeRegistry, bootstrap_schema, load_schema_text
from itemgraph.errors import (
    CycleDetected,
    DuplicateTypeName,
    PieceNameCollision,
    RootAlreadyDefined,
    SchemaFileError,
    UnknownParent,
    UnknownPiece,
    UnknownType,
)
from itemgraph.schema import registry_from_defs, registry_to_defs


def oracle_linearization(parents: dict[str, list[str]], name: str) -> list[str]:
    """Reference: DFS pre-order, parents left to right, keep last occurrence."""
    sequence: list[str] = []

    def walk(current: str) -> None:
        sequence.append(current)
        for parent in parents[current]:
            walk(parent)

    walk(name)
    return [t for i, t in enumerate(sequence) if t not in sequence[i + 1 :]]


def oracle_ancestors(parents: dict[str, list[str]], name: str) -> set[str]:
    """Reference: plain reachability, no ordering."""
    seen: set[str] = set()
    frontier = [name]
    while frontier:
        current = frontier.pop()
        if current in seen:
            continue
        seen.add(current)
        frontier.extend(parents[current])
    return seen


def build_random_registry(rng: random.Random, extra_types: int = 12):
    registry = TypeRegistry()
    registry.define(
        "Item",
        [],
        [
            PieceDefinition("description", "text"),
            PieceDefinition("creator", "item_pointer", "Agent", True),
        ],
    )
    registry.define("Agent", ["Item"], [])
    parents: dict[str, list[str]] = {"Item": [], "Agent": ["Item"]}
    for i in range(extra_types):
        name = f"T{i}"
        count = rng.randint(1, min(3, len(parents)))
        chosen = rng.sample(sorted(parents), count)
        pieces = [
            PieceDefinition(f"t{i}_p{j}", "text") for j in range(rng.randint(0, 2))
        ]
        registry.define(name, chosen, pieces)
        parents[name] = chosen
    registry.validate_pointer_targets()
    return registry, parents


class TestLinearization:
    def test_single_chain(self):
        registry = bootstrap_schema()
        assert registry.ancestry("Person") == ("Person", "Agent", "Item")

    def test_root_is_itself(self):
        registry = bootstrap_schema()
        assert registry.ancestry("Item") == ("Item",)

    def test_diamond_lists_each_ancestor_once(self):
        registry = bootstrap_schema()
        chain = registry.ancestry("TextComment")
        assert chain[0] == "TextComment"
        assert chain[-1] == "Item"
        for ancestor in ("Comment", "TextDocument", "Item"):
            assert chain.count(ancestor) == 1

    def test_matches_oracle_on_random_hierarchies(self):
        rng = random.Random(1109)
        for _ in range(60):
            registry, parents = build_random_registry(rng)
            for name in parents:
                expected = oracle_linearization(parents, name)
                assert list(registry.ancestry(name)) == expected, name

    def test_subtype_is_reachability(self):
        rng = random.Random(7321)
        for _ in range(30):
            registry, parents = build_random_registry(rng)
            names = sorted(parents)
            for candidate in names:
                reachable = oracle_ancestors(parents, candidate)
                for ancestor in names:
                    assert registry.is_subtype(candidate, ancestor) == (
                        ancestor in reachable
                    )

    def test_root_always_last(self):
        rng = random.Random(99)
        for _ in range(30):
            registry, parents = build_random_registry(rng)
            for name in parents:
                assert registry.ancestry(name)[-1] == "Item"


class TestPieceInheritance:
    def test_person_inherits_item_pieces(self):
        registry = bootstrap_schema()
        names = [p.name for p in registry.all_pieces("Person")]
        assert "description" in names
        assert "first_name" in names
        assert "creator" in names

    def test_root_pieces_are_its_own(self):
        registry = bootstrap_schema()
        assert registry.all_pieces("Item") == registry.get("Item").own_pieces

    def test_diamond_merges_shared_piece_once(self):
        # brute-force union over the ancestor closure, ignoring order
        registry = bootstrap_schema()
        expected: set[str] = set()
        for ancestor in oracle_ancestors(
            {
                "TextComment": ["Comment", "TextDocument"],
                "Comment": ["Item"],
                "TextDocument": ["Document"],
                "Document": ["Item"],
                "Item": [],
            },
            "TextComment",
        ):
            expected.update(p.name for p in registry.get(ancestor).own_pieces)
        names = [p.name for p in registry.all_pieces("TextComment")]
        assert set(names) == expected
        assert names.count("description") == 1
        assert names.count("creator") == 1

    def test_inheritance_is_monotone(self):
        rng = random.Random(555)
        for _ in range(30):
            registry, parents = build_random_registry(rng)
            for name, direct in parents.items():
                mine = {p.name for p in registry.all_pieces(name)}
                for parent in direct:
                    theirs = {p.name for p in registry.all_pieces(parent)}
                    assert theirs <= mine

    def test_own_pieces_come_last(self):
        registry = bootstrap_schema()
        names = [p.name for p in registry.all_pieces("Person")]
        assert names[-1] == "first_name"

    def test_owner_of_piece(self):
        registry = bootstrap_schema()
        assert registry.owner_of_piece("Person", "description") == "Item"
        assert registry.owner_of_piece("Person", "first_name") == "Person"
        assert registry.owner_of_piece("TextComment", "body") == "TextDocument"

    def test_unknown_piece(self):
        registry = bootstrap_schema()
        with pytest.raises(UnknownPiece):
            registry.piece("Person", "surname")


class TestDefinitionErrors:
    def test_duplicate_type_name(self):
        registry = bootstrap_schema()
        with pytest.raises(DuplicateTypeName):
            registry.define("Person", ["Agent"], [])

    def test_unknown_parent(self):
        registry = bootstrap_schema()
        with pytest.raises(UnknownParent):
            registry.define("Widget", ["Gadget"], [])

    def test_self_parent_is_a_cycle(self):
        registry = bootstrap_schema()
        with pytest.raises(CycleDetected):
            registry.define("Selfish", ["Selfish"], [])

    def test_second_root_rejected(self):
        registry = bootstrap_schema()
        with pytest.raises(RootAlreadyDefined):
            registry.define("OtherRoot", [], [])

    def test_colliding_piece_names_rejected(self):
        registry = TypeRegistry()
        registry.define("Item", [], [PieceDefinition("creator", "item_pointer", "Item", True)])
        registry.define("A", ["Item"], [PieceDefinition("label", "text")])
        registry.define("B", ["Item"], [PieceDefinition("label", "text")])
        with pytest.raises(PieceNameCollision):
            registry.define("AB", ["A", "B"], [])

    def test_shadowing_inherited_piece_rejected(self):
        registry = bootstrap_schema()
        with pytest.raises(PieceNameCollision):
            registry.define("Labeled", ["Item"], [PieceDefinition("description", "text")])

    def test_diamond_shared_owner_is_fine(self):
        # both parents inherit the same piece from one owner; no collision
        registry = bootstrap_schema()
        registry.define("RichTextComment", ["TextComment"], [])
        names = [p.name for p in registry.all_pieces("RichTextComment")]
        assert names.count("description") == 1

    def test_unknown_type_lookup(self):
        registry = bootstrap_schema()
        with pytest.raises(UnknownType):
            registry.get("Nope")
        with pytest.raises(UnknownType):
            registry.ancestry("Nope")


class TestSchemaFiles:
    def test_bootstrap_hierarchy_contents(self):
        registry = bootstrap_schema()
        for name in (
            "Item",
            "Agent",
            "Person",
            "ContactMethod",
            "Document",
            "TextDocument",
            "Comment",
            "TextComment",
            "Collection",
            "Membership",
            "Transclusion",
            "Excerpt",
        ):
            assert name in registry

    def test_textcomment_has_both_parents(self):
        registry = bootstrap_schema()
        assert registry.get("TextComment").parents == ("Comment", "TextDocument")

    def test_parse_and_extend(self):
        registry = bootstrap_schema()
        load_schema_text(
            registry,
            """
            # an event subtype for tests
            type Event: Document
              piece starts_at: text, required
              piece seats: integer
            """,
        )
        assert registry.ancestry("Event") == ("Event", "Document", "Item")
        piece = registry.piece("Event", "starts_at")
        assert piece.required

    def test_parse_error_reports_line(self):
        registry = bootstrap_schema()
        with pytest.raises(SchemaFileError) as excinfo:
            load_schema_text(registry, "type Slide: Document\npiece n0pe =\n")
        assert "line 2" in str(excinfo.value)

    def test_piece_outside_type_rejected(self):
        registry = bootstrap_schema()
        with pytest.raises(SchemaFileError):
            load_schema_text(registry, "piece stray: text\n")

    def test_pointer_kind_requires_target(self):
        with pytest.raises(Exception):
            PieceDefinition("ref", "item_pointer", None)

    def test_scalar_kind_rejects_target(self):
        with pytest.raises(Exception):
            PieceDefinition("label", "text", "Item")

    def test_defs_round_trip(self):
        registry = bootstrap_schema()
        defs = registry_to_defs(registry)
        rebuilt = registry_from_defs(defs)
        assert registry_to_defs(rebuilt) == defs
        assert rebuilt.ancestry("TextComment") == registry.ancestry("TextComment")

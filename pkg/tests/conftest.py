import json
from pathlib import Path

import pytest

TOY = Path(__file__).resolve().parents[1] / "src" / "relretro" / "data" / "toy_movies"


@pytest.fixture
def toy_dir():
    return TOY


def write_dataset(root: Path, tables: dict[str, str], manifest: list[dict]) -> Path:
    """Write CSV bodies and a manifest under ``root``; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    for name, body in tables.items():
        (root / name).write_text(body, encoding="utf-8")
    path = root / "manifest.json"
    path.write_text(json.dumps({"tables": manifest}), encoding="utf-8")
    return path


@pytest.fixture
def movie_db(tmp_path):
    """Movies with a row-wise director column, a country FK, persons and a genre link table."""
    tables = {
        "countries.csv": "id,name\n1,USA\n2,France\n",
        "movies.csv": (
            "id,title,director_text,country_id\n"
            "1,Alien,Scott,1\n"
            "2,Brazil,Gilliam,1\n"
            "3,Amélie,Jeunet,2\n"
            "4,Heat,,1\n"
            "5,Fargo,NULL,1\n"
            "6,USA,Coen,1\n"
        ),
        "persons.csv": 'id,name,movie_id\n1,"Lee, Ang",2\n2,Amélie,3\n3,Nobody,\n',
        "genres.csv": "id,name\n1,SciFi\n2,Comedy\n",
        "movie_genre.csv": "movie_id,genre_id\n1,1\n2,1\n2,2\n",
    }
    manifest = [
        {"name": "countries", "csv": "countries.csv", "primary_key": "id", "text_columns": ["name"]},
        {"name": "movies", "csv": "movies.csv", "primary_key": "id", "text_columns": ["title", "director_text"],
         "foreign_keys": [{"column": "country_id", "ref_table": "countries", "ref_column": "id"}]},
        {"name": "persons", "csv": "persons.csv", "primary_key": "id", "text_columns": ["name"],
         "foreign_keys": [{"column": "movie_id", "ref_table": "movies", "ref_column": "id"}]},
        {"name": "genres", "csv": "genres.csv", "primary_key": "id", "text_columns": ["name"]},
        {"name": "movie_genre", "csv": "movie_genre.csv", "is_link_table": True,
         "foreign_keys": [{"column": "movie_id", "ref_table": "movies", "ref_column": "id"},
                          {"column": "genre_id", "ref_table": "genres", "ref_column": "id"}]},
    ]
    return write_dataset(tmp_path / "db", tables, manifest)


ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert."""

    def check(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

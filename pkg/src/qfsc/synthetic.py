"""Synthetic Slovene-like corpus on which the mock stack behaves predictably.

Each document mixes entity sentences (one entity each, every sentence built
from a different frame so its surrounding words are unique in the document)
with filler sentences that the capitalized-run tagger finds nothing in. The
extractive summary of a document is its entity sentences, verbatim.
"""
from __future__ import annotations

import random

from qfsc.corpus import CorpusEntry

ENTITIES = (
    "Janez Novak", "Ana Kovač", "Ljubljana", "Maribor", "Luka Dončić", "Celje",
    "Triglav", "Mojca Horvat", "Krka", "Petrol", "Nova Gorica", "Koper",
    "Tina Zupan", "Marko Kranjc", "Bled", "Ptuj", "Olimpija", "Jure Potočnik",
    "Postojna", "Sava", "Eva Golob", "Murska Sobota", "Velenje", "Gorenje",
)

FRAMES = (
    "Včeraj je {e} obiskal staro tržnico.",
    "Po poročanju medijev je {e} podpisal novo pogodbo.",
    "Lani so v kraju {e} odprli novo knjižnico.",
    "Župan je dejal, da {e} potrebuje več sredstev.",
    "Na sestanku je {e} predstavil letno poročilo.",
    "Za nagrado se poteguje tudi {e} z mladimi sodelavci.",
    "Ob koncu tedna je {e} gostil mednarodno konferenco.",
    "Novinarji so izvedeli, da {e} načrtuje širitev.",
    "Glavni govornik je bil {e} iz domačega društva.",
    "Pred leti je {e} prejel posebno priznanje.",
    "Pozno zvečer je {e} objavil pomembno odločitev.",
    "Med obiskom je {e} poudaril pomen sodelovanja.",
)

FILLERS = (
    "Vreme je bilo ves dan oblačno in hladno.",
    "Dogodek je privabil veliko obiskovalcev.",
    "Organizatorji so bili z udeležbo zelo zadovoljni.",
    "Razprava se je nadaljevala pozno v noč.",
    "Cene so se v zadnjem letu občutno zvišale.",
    "Več podrobnosti bo znanih prihodnji teden.",
    "Strokovnjaki opozarjajo na pomanjkanje delavcev.",
    "Promet je bil zaradi del močno oviran.",
    "Prebivalci so izrazili zaskrbljenost zaradi hrupa.",
    "Odločitev so sprejeli soglasno in brez razprave.",
)


def make_entry(index: int, rng: random.Random, n_entities: int = 6, n_fillers: int = 6) -> CorpusEntry:
    entities = rng.sample(ENTITIES, n_entities)
    frames = rng.sample(FRAMES, n_entities)
    sentences = [f.format(e=e) for f, e in zip(frames, entities)]
    fillers = rng.sample(FILLERS, min(n_fillers, len(FILLERS)))
    # interleave: keep entity sentences in order, sprinkle fillers between them
    merged: list[str] = []
    slots = sorted(rng.sample(range(n_entities + len(fillers)), len(fillers)))
    ent_iter, fil_iter = iter(sentences), iter(fillers)
    for pos in range(n_entities + len(fillers)):
        merged.append(next(fil_iter) if pos in slots else next(ent_iter))
    query = f"Kaj je znano o {entities[0]} in {entities[1]}?"
    return CorpusEntry(id=f"doc-{index:03d}", text=" ".join(merged), query=query, title=f"Novica {index}")


def make_corpus(n_docs: int = 4, seed: int = 7, n_entities: int = 6) -> list[CorpusEntry]:
    rng = random.Random(seed)
    return [make_entry(i, rng, n_entities=n_entities) for i in range(n_docs)]


def _entity_sentences(entry: CorpusEntry) -> list[str]:
    from qfsc.textproc import split_sentences

    return [s for s in split_sentences(entry.text) if any(e in s for e in ENTITIES)]


def extractive_summary(entry: CorpusEntry) -> str:
    """The document's entity-bearing sentences, verbatim and in order."""
    return " ".join(_entity_sentences(entry))


def corrupt_surface(surface: str) -> str:
    """A different, still capitalized surface form of the same length."""
    last = surface[-1]
    return surface[:-1] + ("o" if last != "o" else "e")


def corrupt_summary(summary: str, entity: str) -> str:
    if entity not in summary:
        raise ValueError(f"{entity!r} does not occur in the summary")
    return summary.replace(entity, corrupt_surface(entity), 1)


def summary_entities(entry: CorpusEntry) -> list[str]:
    summary = extractive_summary(entry)
    return sorted((e for e in ENTITIES if e in summary), key=summary.index)

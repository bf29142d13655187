"""Distributed primal-dual dominating set algorithms for bounded-arboricity
graphs, a synchronous message-passing simulator to run them, and exact
oracles to check their guarantees."""

__version__ = "0.1.0"

"""Query-focused summarization via query decomposition and chunked QA, with
reference-free QAGS and QuestEval evaluation."""

__version__ = "0.1.0"

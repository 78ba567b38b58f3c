"""evidex: evidence retrieval for news verification.

Given a news article, fetch candidate articles from user-selected
reliable sources and rank them by semantic distance computed with
optimal transport over word embeddings; articles below a calibrated
distance threshold count as supporting evidence.
"""

__version__ = "0.1.0"

"""scholarnode: a self-hostable node of a federated, community-reviewed
scholarly publishing network."""

__version__ = "0.1.0"

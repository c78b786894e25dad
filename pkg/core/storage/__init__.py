"""Binary record helpers shared by region snapshots and model checkpoints."""
from .binary import BinaryReader, BinaryWriter, write_bytes_atomic

__all__ = ['BinaryReader', 'BinaryWriter', 'write_bytes_atomic']

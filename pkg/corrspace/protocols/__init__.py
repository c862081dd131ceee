"""Adaptive measurement protocols on MPS resource states."""

__all__ = [
    "AKLTRotationProtocol",
    "ClusterProtocol",
    "MeasurementProtocol",
    "ProtocolFactory",
    "TriclusterProtocol",
]

from corrspace.protocols.aklt import AKLTRotationProtocol
from corrspace.protocols.base_protocol import MeasurementProtocol
from corrspace.protocols.cluster import ClusterProtocol
from corrspace.protocols.protocol_factory import ProtocolFactory
from corrspace.protocols.tricluster import TriclusterProtocol

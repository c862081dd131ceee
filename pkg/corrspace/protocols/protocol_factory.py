"""Factory for creating measurement protocols."""

from typing import Any

from corrspace.core.resource import MpsResource
from corrspace.protocols.aklt import AKLTRotationProtocol
from corrspace.protocols.base_protocol import MeasurementProtocol
from corrspace.protocols.cluster import ClusterProtocol
from corrspace.protocols.tricluster import TriclusterProtocol


class ProtocolFactory:
    """Factory class for creating the protocol that matches a resource."""

    _protocols: dict[str, type[MeasurementProtocol]] = {
        "cluster": ClusterProtocol,
        "aklt": AKLTRotationProtocol,
        "tricluster": TriclusterProtocol,
    }

    _default_for_resource: dict[str, str] = {
        "cluster": "cluster",
        "aklt": "aklt",
        "aklt_modified": "aklt",
        "tricluster": "tricluster",
    }

    @classmethod
    def get_protocol(
        cls, protocol_type: str, resource: MpsResource, **params: Any
    ) -> MeasurementProtocol:
        """Get the protocol of the given type bound to ``resource``.

        Args:
            protocol_type: ``cluster``, ``aklt``, ``tricluster`` or ``auto``
            resource: The resource state the protocol measures
            **params: ``angles`` for cluster/tricluster, ``theta`` and ``r`` for aklt

        Returns:
            A protocol instance

        Raises:
            ValueError: If the protocol type is not supported
        """
        return cls._protocols[cls.get_protocol_name(protocol_type, resource)](
            resource, **params
        )

    @classmethod
    def get_protocol_name(cls, protocol_type: str, resource: MpsResource) -> str:
        """Validated protocol name, with ``auto`` resolved against the resource.

        Raises:
            ValueError: If the protocol type is not supported
        """
        key = protocol_type.lower()
        if key == "auto":
            return cls.default_for(resource)
        if key not in cls._protocols:
            raise ValueError(
                "Unsupported protocol type: {}. Supported types: {}".format(
                    protocol_type, ", ".join(cls._protocols.keys())
                )
            )
        return key

    @classmethod
    def default_for(cls, resource: MpsResource) -> str:
        """Protocol name for a resource, by name first and physical dimension second."""
        if resource.name in cls._default_for_resource:
            return cls._default_for_resource[resource.name]
        for name, protocol_class in cls._protocols.items():
            if protocol_class.physical_dim == resource.d:
                return name
        raise ValueError(
            f"No protocol for resource {resource.name} with d={resource.d}"
        )

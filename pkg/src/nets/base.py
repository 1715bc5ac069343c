"""
Base network class for the learned components.
"""
from abc import ABC, abstractmethod


class BaseNetwork(ABC):
    """
    Abstract base class for networks whose weights live in a shared ParameterStore.
    All specific networks should inherit from this class.
    """

    # Parameter-store path prefix owned by the network
    prefix = ''

    def __init__(self, config):
        """
        Initialize the network with the run config.

        Args:
            config (LabConfig): Sizes come from ``config.net`` and ``config.env``.
        """
        self.config = config
        self.net = config.net
        self.env = config.env

    @abstractmethod
    def init_params(self, store, rng):
        """
        Create this network's entries in ``store``.

        Args:
            store (ParameterStore): Shared parameter store.
            rng (SeededRng): Initialisation randomness.
        """
        pass

    def validate_input(self, data):
        """
        Validate the input data.

        Args:
            data: The input to validate.

        Returns:
            bool: True if valid, False otherwise.
        """
        return True

    def param_names(self, store):
        """Names of the store entries owned by this network."""
        return [name for name in store.names() if name.startswith(self.prefix + '.')]

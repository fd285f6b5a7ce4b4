"""Urban chair-occupancy sensing, end to end in software: simulated LoRaWAN
sensor nodes, a bit-exact uplink codec, a lossy channel, a network server
with persistence and HTTP APIs, and the analytics on top."""

__version__ = "0.1.0"

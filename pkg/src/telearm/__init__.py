"""Teleoperation stack for a simulated five-joint arm.

Subsystems: wire protocol codec (protocol), arm model (arm), FIFO session
arbitration (session), latency decomposition (latency), the transport-free
server engine (engine), the TCP/WebSocket server (server), and the
deterministic simulated-network harness (simnet).
"""

__version__ = "0.1.0"

# Crowd simulation and IoT deployment modules

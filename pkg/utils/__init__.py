# Utility modules for the design-space explorer

# Kernel shape search package

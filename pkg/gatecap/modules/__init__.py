# Módulos do gatecap

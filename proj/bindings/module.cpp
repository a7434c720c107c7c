#include <pybind11/pybind11.h>
PYBIND11_MODULE(wpirsharp, m) { m.doc() = "stub"; }

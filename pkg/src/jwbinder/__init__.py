"""Static reconstruction of JavaScript-WebAssembly programs into pure JavaScript."""

__version__ = "0.1.0"

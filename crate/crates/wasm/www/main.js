import init, { EmbedDemo, index_report, sample_mpeg1_stream, sample_mv1, sextet_table } from "./pkg/vidmark_wasm.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function paint(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
}

function embed() {
  if (demo) demo.free();
  demo = null;
  const w = Number($("wm-w").value), h = Number($("wm-h").value);
  try {
    demo = new EmbedDemo(w, h, Number($("wm-seed").value) >>> 0, $("wm-text").value);
  } catch (e) {
    $("wm-stats").textContent = "error: " + e;
    return;
  }
  paint($("c-orig"), demo.original_rgba(), w, h);
  paint($("c-marked"), demo.marked_rgba(), w, h);
  redrawDiff();
  $("wm-stats").textContent = [
    `capacity        ${demo.capacity_bytes()} bytes`,
    `pixels used     ${demo.pixels_used()} of ${w * h}`,
    `pixels changed  ${demo.changed_pixels()}`,
    `max |delta|     ${demo.max_delta()}`,
    `crc32           ${demo.crc32_hex()}`,
    `key (base64)    ${demo.key_base64()}`,
    `restored exact  ${demo.restored_exact()}`,
  ].join("\n");
  $("t-out").textContent = "";
}

function redrawDiff() {
  if (!demo) return;
  paint($("c-diff"), demo.diff_rgba(Number($("wm-gain").value)), demo.width(), demo.height());
}

function tamper(pixel, channel) {
  if (!demo) return;
  $("t-out").textContent = `pixel ${pixel}, channel ${"RGB"[channel]}: ` + demo.tamper(pixel, channel);
}

function showIndex(bytes) {
  $("ix-out").textContent = `${bytes.length} bytes\n` + index_report(bytes);
}

await init();

$("wm-run").onclick = embed;
$("wm-gain").oninput = redrawDiff;
$("t-run").onclick = () => tamper(Number($("t-pixel").value), Number($("t-chan").value));
$("c-marked").onclick = (ev) => {
  if (!demo) return;
  const r = ev.target.getBoundingClientRect();
  const x = Math.floor(((ev.clientX - r.left) / r.width) * demo.width());
  const y = Math.floor(((ev.clientY - r.top) / r.height) * demo.height());
  const pixel = y * demo.width() + x;
  $("t-pixel").value = pixel;
  tamper(pixel, Number($("t-chan").value));
};

$("ix-file").onchange = async (ev) => {
  const f = ev.target.files[0];
  if (f) showIndex(new Uint8Array(await f.arrayBuffer()));
};
$("ix-mpeg").onclick = () => showIndex(sample_mpeg1_stream(352, 240, 3, $("ix-pattern").value));
$("ix-mv1").onclick = () => showIndex(sample_mv1(32, 24, 3, 4, 1));

const sextets = () => ($("sx-out").textContent = sextet_table($("sx-text").value, 64));
$("sx-text").oninput = sextets;

embed();
sextets();

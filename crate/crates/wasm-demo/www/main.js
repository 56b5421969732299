import init, { denoise_image, dct_atlas, coder_race } from "./pkg/sparse_denoise_wasm.js";

const EDGE = 128;
const $ = (id) => document.getElementById(id);
let clean = synthetic();
let lastAtlas = null;

function synthetic() {
  const px = new Uint8Array(EDGE * EDGE);
  for (let r = 0; r < EDGE; r++) {
    for (let c = 0; c < EDGE; c++) {
      const ring = Math.hypot(r - 64, c - 64) < 40 ? 60 : 0;
      const bars = Math.floor(c / 16) % 2 ? 40 : 0;
      px[r * EDGE + c] = 90 + ring + bars + 30 * Math.sin(r / 9);
    }
  }
  return { width: EDGE, height: EDGE, bytes: px };
}

function draw(id, pic) {
  const canvas = $(id);
  canvas.width = pic.width;
  canvas.height = pic.height;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(pic.width, pic.height);
  pic.bytes.forEach((v, i) => {
    img.data.set([v, v, v, 255], 4 * i);
  });
  ctx.putImageData(img, 0, 0);
}

function asPlain(pic) {
  return { width: pic.width, height: pic.height, bytes: pic.bytes() };
}

async function loadFile(file) {
  const bitmap = await createImageBitmap(file);
  const side = Math.min(bitmap.width, bitmap.height);
  const canvas = new OffscreenCanvas(EDGE, EDGE);
  const ctx = canvas.getContext("2d");
  ctx.drawImage(bitmap, (bitmap.width - side) / 2, (bitmap.height - side) / 2, side, side, 0, 0, EDGE, EDGE);
  const rgba = ctx.getImageData(0, 0, EDGE, EDGE).data;
  const px = new Uint8Array(EDGE * EDGE);
  for (let i = 0; i < px.length; i++) {
    px[i] = Math.round(0.2989 * rgba[4 * i] + 0.587 * rgba[4 * i + 1] + 0.114 * rgba[4 * i + 2]);
  }
  return { width: EDGE, height: EDGE, bytes: px };
}

// Lets the status text paint before a long synchronous call.
const yieldFrame = () => new Promise((r) => requestAnimationFrame(() => setTimeout(r)));

async function runDenoise() {
  $("status").textContent = "denoising...";
  await yieldFrame();
  const t = performance.now();
  try {
    const res = denoise_image(clean.bytes, clean.width, clean.height,
      Number($("sigma").value), $("coder").value, Number($("t0").value), Number($("seed").value));
    draw("noisy", asPlain(res.noisy()));
    draw("denoised", asPlain(res.denoised()));
    lastAtlas = asPlain(res.atlas());
    $("trained").disabled = false;
    $("scores").textContent =
      `T0=${res.t0}: noisy ${res.noisy_psnr.toFixed(2)} dB, denoised ${res.psnr.toFixed(2)} dB, SSIM ${res.ssim.toFixed(3)}`;
    res.free();
    $("status").textContent = `done in ${((performance.now() - t) / 1000).toFixed(1)} s`;
  } catch (e) {
    $("status").textContent = `error: ${e}`;
  }
}

function showAtlas(pic, caption) {
  draw("atlas", pic);
  $("atlas-caption").textContent = caption;
}

function runRace() {
  try {
    const out = JSON.parse(coder_race(Number($("race-n").value), Number($("race-k").value),
      Number($("race-t0").value), Number($("race-seed").value)));
    const best = out.exhaustive.objective;
    const rows = [["coder", "objective", "excess over exhaustive", "support"]];
    for (const [name, r] of Object.entries(out)) {
      const extra = name === "pdas" ? ` (${r.iterations} iterations${r.converged ? "" : ", not converged"})` : "";
      rows.push([name + extra, r.objective.toFixed(6), (r.objective - best).toExponential(2), r.support.join(",")]);
    }
    $("race-table").innerHTML = rows
      .map((row, i) => "<tr>" + row.map((c) => (i ? `<td>${c}</td>` : `<th>${c}</th>`)).join("") + "</tr>")
      .join("");
  } catch (e) {
    $("status").textContent = `error: ${e}`;
  }
}

await init();
draw("clean", clean);
for (const id of ["run", "dct", "race"]) $(id).disabled = false;
$("status").textContent = "ready";

$("file").addEventListener("change", async (ev) => {
  if (ev.target.files.length) {
    clean = await loadFile(ev.target.files[0]);
    draw("clean", clean);
  }
});
$("run").addEventListener("click", runDenoise);
$("dct").addEventListener("click", () => {
  const atlas = dct_atlas(256);
  showAtlas(asPlain(atlas), "overcomplete DCT, 256 atoms");
  atlas.free();
});
$("trained").addEventListener("click", () => showAtlas(lastAtlas, "dictionary trained on the last noisy image"));
$("race").addEventListener("click", runRace);

import init, { Ring } from "./pkg/ringflow_web.js";

const SAMPLES = 301;
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, ys, length, { label, marks = [], zero = false }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 48;
  ctx.clearRect(0, 0, w, h);
  let lo = Math.min(...ys), hi = Math.max(...ys);
  if (zero) { lo = Math.min(lo, 0); hi = Math.max(hi, 0); }
  if (hi - lo < 1e-12) { lo -= 1; hi += 1; }
  const sx = (i) => pad + (w - 2 * pad) * i / (ys.length - 1);
  const sy = (v) => h - pad / 2 - (h - pad) * (v - lo) / (hi - lo);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px sans-serif";
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - pad);
  ctx.fillText(hi.toPrecision(6), 2, sy(hi) + 4);
  ctx.fillText(lo.toPrecision(6), 2, sy(lo));
  ctx.fillText("0", pad - 4, h - 4);
  ctx.fillText(`${length} m`, w - pad - 30, h - 4);
  ctx.fillText(label, pad + 6, pad / 2 + 14);
  if (zero) {
    ctx.strokeStyle = "#ccc";
    ctx.beginPath(); ctx.moveTo(pad, sy(0)); ctx.lineTo(w - pad, sy(0)); ctx.stroke();
  }
  for (const x of marks) {
    const px = pad + (w - 2 * pad) * x / length;
    ctx.strokeStyle = "#d33";
    ctx.beginPath(); ctx.moveTo(px, pad / 2); ctx.lineTo(px, h - pad / 2); ctx.stroke();
  }
  ctx.strokeStyle = "#1565c0"; ctx.lineWidth = 1.5;
  ctx.beginPath();
  ys.forEach((v, i) => (i ? ctx.lineTo(sx(i), sy(v)) : ctx.moveTo(sx(i), sy(v))));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function ring() {
  return new Ring(num("length"), num("speed"), num("a"), num("p1"), num("g0"), num("tap"), num("rate"));
}

function update() {
  $("error").textContent = "";
  let r;
  try {
    r = ring();
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
    return;
  }
  try {
    const t = num("time");
    $("time-out").textContent = t;
    let node = null;
    try {
      node = r.couplingPoint(t);
      $("node").textContent = `${node.toFixed(1)} m`;
    } catch (e) {
      $("node").textContent = String(e.message ?? e);
    }
    const marks = node === null ? [] : [node];
    plot($("pressure"), r.pressureProfile(t, SAMPLES), num("length"), { label: "P [Pa]", marks });
    plot($("gradient"), r.gradientProfile(t, SAMPLES), num("length"), { label: "dP/dx [Pa/m]", marks, zero: true });
    try {
      const a = JSON.parse(r.admissible(num("horizon"), num("pmin")));
      $("admissible").textContent =
        `tap x_new        ${a.x_new_m.toFixed(1)} m\n` +
        `total withdrawal ${a.g_total.toFixed(4)} Pa·s/m (added ${a.g_new.toFixed(4)})\n` +
        `inlet pressure   ${a.inlet_pressure_pa.toFixed(0)} Pa\n` +
        `inlet drop       ${(100 * a.drop_fraction).toFixed(2)} % — ${a.band}`;
    } catch (e) {
      $("admissible").textContent = String(e.message ?? e);
    }
  } finally {
    r.free();
  }
}

await init();
for (const el of document.querySelectorAll("input")) el.addEventListener("input", update);
update();

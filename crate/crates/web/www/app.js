import init, { matrixView, roundtrip, recurrence } from './pkg/zrecover_web.js';

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.className = 'err';
    out.textContent = e.message ?? String(e);
  }
}

function drawMatrix() {
  const info = $('minfo');
  guard(info, () => {
    const v = JSON.parse(matrixView(num('mp'), num('mm'), num('ms')));
    info.className = '';
    info.textContent =
      `${v.bound_met}/${v.columns} columns within |φ| ≤ ${v.element_bound.toFixed(1)}; ` +
      `max |φ| = ${v.max_abs_entry}` +
      (v.shown_columns < v.columns ? `; showing the first ${v.shown_columns} columns` : '');
    const c = $('mcanvas');
    c.width = v.shown_columns;
    c.height = v.m;
    c.style.height = `${Math.max(40, Math.min(320, 8 * v.m))}px`;
    const ctx = c.getContext('2d');
    const img = ctx.createImageData(c.width, c.height);
    const half = (v.p - 1) / 2;
    v.entries.forEach((row, i) => row.forEach((e, j) => {
      const t = Math.abs(e) / half;
      const k = 4 * (i * c.width + j);
      // red for positive, blue for negative, white near zero
      img.data[k] = e >= 0 ? 255 : 255 * (1 - t);
      img.data[k + 1] = 255 * (1 - t);
      img.data[k + 2] = e <= 0 ? 255 : 255 * (1 - t);
      img.data[k + 3] = 255;
    }));
    ctx.putImageData(img, 0, 0);
  });
}

function describe(ev) {
  switch (ev.event) {
    case 'strip': return `strip common factor p^${ev.alpha}`;
    case 'main-step':
      return `main step ${ev.step}: residual mod p = [${ev.residual_mod_p}], recurrence [${ev.recurrence}], ` +
        `roots [${ev.roots}] -> support {${ev.support}}`;
    case 'digits':
      return `  digits at p^${ev.exponent}: ` + ev.digits.map(([j, d]) => `x${j}:${d}`).join(' ');
    case 'lift': return `  divide residual by p^${ev.gamma}`;
    case 'inconsistent': return `  row ${ev.row} not explained by the support; new main step`;
    case 'halt': return `halt: ${ev.status} (${ev.reason})`;
    default: return JSON.stringify(ev);
  }
}

function runRoundtrip() {
  const info = $('rinfo');
  $('rtrace').textContent = '';
  guard(info, () => {
    const r = JSON.parse(roundtrip(num('rp'), num('rm'), $('rx').value));
    const ok = r.status === 'success' && r.exact;
    info.className = ok ? 'ok' : 'err';
    info.textContent =
      `${r.status}${r.exact ? ', exact' : ''}: s = ${r.sparsity} (recoverable up to ${r.recoverable_sparsity}), ` +
      `L = ${r.steps}, digits = ${r.inner_steps}, field ops = ${r.field_ops}, ring ops = ${r.ring_ops}, ` +
      `peak |value| has ${r.peak_magnitude.length} digits`;
    $('rtrace').textContent =
      `y = (${r.y.join(', ')})\n\n` + r.trace.map(describe).join('\n') +
      `\n\nrecovered: ${r.decoded.map(([j, v]) => `x${j} = ${v}`).join(', ') || '0'}`;
  });
}

function runRecurrence() {
  const out = $('bout');
  guard(out, () => {
    const r = JSON.parse(recurrence(num('bp'), $('bs').value));
    out.className = '';
    out.textContent =
      `sequence mod ${r.p}: ${r.sequence.join(' ')}\n` +
      `order ${r.order}${r.certified ? '' : ' (too few terms to certify minimality)'}\n` +
      `characteristic polynomial (low degree first): [${r.polynomial}]\n` +
      `nonzero roots: [${r.roots}]`;
  });
}

await init();
$('mgo').onclick = drawMatrix;
$('rgo').onclick = runRoundtrip;
$('bgo').onclick = runRecurrence;
drawMatrix();
runRoundtrip();
runRecurrence();

// expect: race
int a[4];
void *t1(void *p) {
  a[2] = 1;
  return NULL;
}
void *t2(void *p) {
  a[2] = 2;
  return NULL;
}
int main() {
  create(t1);
  create(t2);
  return 0;
}

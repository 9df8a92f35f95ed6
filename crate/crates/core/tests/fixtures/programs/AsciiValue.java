import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class AsciiValue {
    //@ requires k!= null && k.length() == 1;
    //@ ensures \result == (k.length() == 1? (int) k.charAt(0) : -1);
    public static int asciiValue(String k) {
        if (k.length() == 1) {
            return (int) k.charAt(0);
        } else {
            return -1;
        }
    }
}
